//! Duality, lower envelopes, point location and group search.

pub mod envelope;
pub mod group_max;
pub mod hull;
pub mod locate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use envelope::{EnvelopeIndex, LocateMode};
pub use group_max::{GroupHit, GroupMaxIndex, RangeMaxIndex};


/// The plane `z = a·x + b·y + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Plane {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Plane { a, b, c }
    }

    #[inline]
    pub fn at(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }

    /// Plane through three points, `None` if they are vertical or collinear.
    pub fn through(p: [f64; 3], q: [f64; 3], r: [f64; 3]) -> Option<Plane> {
        let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
        let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
        let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        if n[2] == 0.0 {
            return None;
        }
        let a = -n[0] / n[2];
        let b = -n[1] / n[2];
        Some(Plane { a, b, c: p[2] - a * p[0] - b * p[1] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Points with `z <= a·x + b·y + c`.
    Below,
    /// Points with `z >= a·x + b·y + c`.
    Above,
}

/// A closed halfspace bounded by a non-vertical plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceQuery {
    pub orientation: Orientation,
    pub plane: Plane,
}

/// The two dual frames. In either frame a point lies in a query halfspace
/// iff its dual plane passes at or below the query's dual point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    /// Serves `Above` queries with the standard duality.
    Direct,
    /// Serves `Below` queries with the duality applied to z-negated points.
    Mirror,
}

impl Frame {
    pub const BOTH: [Frame; 2] = [Frame::Direct, Frame::Mirror];

    pub fn index(self) -> usize {
        match self {
            Frame::Direct => 0,
            Frame::Mirror => 1,
        }
    }
}

/// Coordinate axis made vertical by a cyclic rotation of the coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Rotates `p` so that this axis comes last.
    pub fn rotate(self, p: [f64; 3]) -> [f64; 3] {
        match self {
            Axis::X => [p[1], p[2], p[0]],
            Axis::Y => [p[2], p[0], p[1]],
            Axis::Z => p,
        }
    }
}

/// A vertical axis together with a frame. Every query is served by the view
/// whose axis has the largest normal component, which keeps the slopes of
/// its dual point within `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct View {
    pub axis: Axis,
    pub frame: Frame,
}

impl View {
    pub const ALL: [View; 6] = [
        View { axis: Axis::X, frame: Frame::Direct },
        View { axis: Axis::X, frame: Frame::Mirror },
        View { axis: Axis::Y, frame: Frame::Direct },
        View { axis: Axis::Y, frame: Frame::Mirror },
        View { axis: Axis::Z, frame: Frame::Direct },
        View { axis: Axis::Z, frame: Frame::Mirror },
    ];

    pub fn index(self) -> usize {
        2 * self.axis.index() + self.frame.index()
    }

    pub fn dual_plane(self, p: [f64; 3]) -> Plane {
        dual_plane(self.axis.rotate(p), self.frame)
    }
}

/// Standard dual of a point: `z = p1·x + p2·y - p3`.
pub fn dualize(p: [f64; 3]) -> Plane {
    Plane { a: p[0], b: p[1], c: -p[2] }
}

pub fn dual_plane(p: [f64; 3], frame: Frame) -> Plane {
    match frame {
        Frame::Direct => dualize(p),
        Frame::Mirror => Plane { a: p[0], b: p[1], c: p[2] },
    }
}

impl HalfspaceQuery {
    pub fn new(orientation: Orientation, plane: Plane) -> Self {
        HalfspaceQuery { orientation, plane }
    }

    pub fn below(a: f64, b: f64, c: f64) -> Self {
        Self::new(Orientation::Below, Plane::new(a, b, c))
    }

    pub fn above(a: f64, b: f64, c: f64) -> Self {
        Self::new(Orientation::Above, Plane::new(a, b, c))
    }

    /// The halfspace `{ p : n·p <= d }`. Fails when `n` has no z component.
    pub fn from_normal(n: [f64; 3], d: f64) -> Result<Self> {
        if n[2] == 0.0 || !n.iter().all(|v| v.is_finite()) || !d.is_finite() {
            return Err(Error::VerticalQuery);
        }
        let plane = Plane::new(-n[0] / n[2], -n[1] / n[2], d / n[2]);
        let orientation = if n[2] > 0.0 { Orientation::Below } else { Orientation::Above };
        Ok(Self::new(orientation, plane))
    }

    /// `(n, d)` such that this halfspace is `{ p : n·p <= d }`.
    pub fn normal_form(&self) -> ([f64; 3], f64) {
        let Plane { a, b, c } = self.plane;
        match self.orientation {
            Orientation::Below => ([-a, -b, 1.0], c),
            Orientation::Above => ([a, b, -1.0], -c),
        }
    }

    /// View serving this query and the query's dual point in it. The z axis
    /// wins ties, so gentle queries keep their own dual point.
    pub fn view(&self) -> (View, [f64; 3]) {
        let (n, d) = self.normal_form();
        let axis = if n[2].abs() >= n[0].abs() && n[2].abs() >= n[1].abs() {
            Axis::Z
        } else if n[0].abs() >= n[1].abs() {
            Axis::X
        } else {
            Axis::Y
        };
        let (frame, q) = match axis {
            Axis::Z => self.dual(),
            _ => HalfspaceQuery::from_normal(axis.rotate(n), d).expect("largest component is nonzero").dual(),
        };
        (View { axis, frame }, q)
    }

    /// Frame and dual point for this query.
    pub fn dual(&self) -> (Frame, [f64; 3]) {
        let Plane { a, b, c } = self.plane;
        match self.orientation {
            Orientation::Above => (Frame::Direct, [a, b, -c]),
            Orientation::Below => (Frame::Mirror, [-a, -b, c]),
        }
    }

    /// Containment, evaluated as the dual test so that every structure
    /// agrees on boundary rounding.
    #[inline]
    pub fn contains(&self, p: [f64; 3]) -> bool {
        self.gap(p) >= 0.0
    }

    /// Non-negative inside; magnitude is the vertical distance to the
    /// boundary plane.
    #[inline]
    pub fn gap(&self, p: [f64; 3]) -> f64 {
        let (frame, q) = self.dual();
        q[2] - dual_plane(p, frame).at(q[0], q[1])
    }

    /// Containment by direct primal evaluation.
    pub fn contains_primal(&self, p: [f64; 3]) -> bool {
        let z = self.plane.at(p[0], p[1]);
        match self.orientation {
            Orientation::Below => p[2] <= z,
            Orientation::Above => p[2] >= z,
        }
    }
}
