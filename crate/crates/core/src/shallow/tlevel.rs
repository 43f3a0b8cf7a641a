//! Vertices of the t-level of an arrangement of planes over a box, found by
//! quadtree pruning followed by brute-force enumeration in small cells.

use crate::geom::Plane;

/// `[x0, x1, y0, y1]`.
pub type Rect = [f64; 4];

const LEAF: usize = 24;
const MAX_DEPTH: u32 = 40;
const MAX_STALL: u32 = 3;

struct Ctx<'a> {
    planes: &'a [Plane],
    bx: Rect,
    out: Vec<[f64; 3]>,
}

/// Points whose convex hull from above equals the upper concave hull of the
/// function "`t + 1`-th smallest plane value" over `bx`.
pub fn level_points(planes: &[Plane], t: usize, bx: Rect) -> Vec<[f64; 3]> {
    assert!(t < planes.len());
    let mut ctx = Ctx { planes, bx, out: Vec::new() };
    let all: Vec<u32> = (0..planes.len() as u32).collect();
    recurse(&mut ctx, bx, all, t, 0, 0);
    ctx.out
}

/// The `t + 1`-th smallest plane value at `(x, y)`.
pub fn level_value(planes: &[Plane], t: usize, x: f64, y: f64) -> f64 {
    let mut v: Vec<f64> = planes.iter().map(|p| p.at(x, y)).collect();
    *v.select_nth_unstable_by(t, f64::total_cmp).1
}

fn tol(z: f64) -> f64 {
    1e-10 * (1.0 + z.abs())
}

fn recurse(ctx: &mut Ctx<'_>, cell: Rect, cands: Vec<u32>, rank: usize, depth: u32, stall: u32) {
    let [x0, x1, y0, y1] = cell;
    let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    let mut lo = Vec::with_capacity(cands.len());
    let mut hi = Vec::with_capacity(cands.len());
    for &j in &cands {
        let p = ctx.planes[j as usize];
        let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &corners {
            let v = p.at(x, y);
            a = a.min(v);
            b = b.max(v);
        }
        lo.push(a);
        hi.push(b);
    }
    let lb = {
        let mut v = lo.clone();
        *v.select_nth_unstable_by(rank, f64::total_cmp).1
    };
    let ub = {
        let mut v = hi.clone();
        *v.select_nth_unstable_by(rank, f64::total_cmp).1
    };
    let mut below = 0;
    let mut kept = Vec::with_capacity(cands.len());
    for (i, &j) in cands.iter().enumerate() {
        if hi[i] < lb {
            below += 1;
        } else if lo[i] <= ub {
            kept.push(j);
        }
    }
    let rank = rank - below;
    let stall = if kept.len() == cands.len() { stall + 1 } else { 0 };
    if kept.len() <= LEAF || depth >= MAX_DEPTH || stall >= MAX_STALL {
        leaf(ctx, cell, &kept, rank);
        return;
    }
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    for sub in [[x0, xm, y0, ym], [xm, x1, y0, ym], [x0, xm, ym, y1], [xm, x1, ym, y1]] {
        recurse(ctx, sub, kept.clone(), rank, depth + 1, stall);
    }
}

fn on_level(planes: &[Plane], cands: &[u32], rank: usize, x: f64, y: f64, z: f64) -> bool {
    let e = tol(z);
    let (mut s, mut eq) = (0, 0);
    for &j in cands {
        let v = planes[j as usize].at(x, y);
        if v < z - e {
            s += 1;
            if s > rank {
                return false;
            }
        } else if v <= z + e {
            eq += 1;
        }
    }
    s <= rank && rank < s + eq
}

fn leaf(ctx: &mut Ctx<'_>, cell: Rect, cands: &[u32], rank: usize) {
    let planes = ctx.planes;
    let [x0, x1, y0, y1] = cell;
    let [bx0, bx1, by0, by1] = ctx.bx;
    let in_x = |x: f64| x >= x0 && (x < x1 || (x1 == bx1 && x <= x1));
    let in_y = |y: f64| y >= y0 && (y < y1 || (y1 == by1 && y <= y1));
    let m = cands.len();
    for i in 0..m {
        let pa = planes[cands[i] as usize];
        for j in i + 1..m {
            let pb = planes[cands[j] as usize];
            let (a1, b1, c1) = (pa.a - pb.a, pa.b - pb.b, pb.c - pa.c);
            for k in j + 1..m {
                let pc = planes[cands[k] as usize];
                let (a2, b2, c2) = (pa.a - pc.a, pa.b - pc.b, pc.c - pa.c);
                let det = a1 * b2 - a2 * b1;
                if det == 0.0 {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / det;
                let y = (a1 * c2 - a2 * c1) / det;
                if !(in_x(x) && in_y(y)) {
                    continue;
                }
                let z = pa.at(x, y);
                if on_level(planes, cands, rank, x, y, z) {
                    ctx.out.push([x, y, z]);
                }
            }
        }
    }
    // Breakpoints along the box boundary.
    let mut sides: Vec<(bool, f64, f64, f64)> = Vec::new();
    if x0 == bx0 {
        sides.push((true, x0, y0, y1));
    }
    if x1 == bx1 {
        sides.push((true, x1, y0, y1));
    }
    if y0 == by0 {
        sides.push((false, y0, x0, x1));
    }
    if y1 == by1 {
        sides.push((false, y1, x0, x1));
    }
    for &(vertical, fixed, s0, s1) in &sides {
        for i in 0..m {
            let pa = planes[cands[i] as usize];
            for j in i + 1..m {
                let pb = planes[cands[j] as usize];
                let (x, y) = if vertical {
                    let db = pa.b - pb.b;
                    if db == 0.0 {
                        continue;
                    }
                    (fixed, (pb.c - pa.c + (pb.a - pa.a) * fixed) / db)
                } else {
                    let da = pa.a - pb.a;
                    if da == 0.0 {
                        continue;
                    }
                    ((pb.c - pa.c + (pb.b - pa.b) * fixed) / da, fixed)
                };
                let s = if vertical { y } else { x };
                if s < s0 || s > s1 {
                    continue;
                }
                let z = pa.at(x, y);
                if on_level(planes, cands, rank, x, y, z) {
                    ctx.out.push([x, y, z]);
                }
            }
        }
        for s in [s0, s1] {
            let (x, y) = if vertical { (fixed, s) } else { (s, fixed) };
            let is_corner = (x == bx0 || x == bx1) && (y == by0 || y == by1);
            if is_corner {
                let mut v: Vec<f64> = cands.iter().map(|&j| planes[j as usize].at(x, y)).collect();
                let z = *v.select_nth_unstable_by(rank, f64::total_cmp).1;
                ctx.out.push([x, y, z]);
            }
        }
    }
}
