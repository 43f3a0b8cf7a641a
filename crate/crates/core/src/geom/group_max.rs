use super::envelope::{EnvelopeIndex, LocateMode};
use super::{dual_plane, Frame, HalfspaceQuery};
use crate::error::{Error, Result};
use crate::types::Dataset;

#[derive(Debug, Clone)]
struct Node {
    lo: usize,
    hi: usize,
    left_env: Option<EnvelopeIndex>,
    children: Option<(usize, usize)>,
}

/// Finds the first group, in a fixed order, that meets a halfspace.
///
/// The search runs over `t + 1` outcomes, the last one meaning "no group",
/// so a query costs at most `ceil(log2(t + 1))` envelope tests. Every node
/// stores the envelope of its left half, which never includes the sentinel.
#[derive(Debug, Clone)]
pub struct GroupMaxIndex {
    t: usize,
    trees: [Vec<Node>; 2],
    refs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupHit {
    pub group: usize,
    pub envelope_calls: u64,
    pub steps: u64,
}

impl GroupMaxIndex {
    pub fn new(pos: &[[f64; 3]], groups: &[Vec<usize>]) -> Result<Self> {
        Self::with_mode(pos, groups, LocateMode::Slab)
    }

    pub fn with_mode(pos: &[[f64; 3]], groups: &[Vec<usize>], mode: LocateMode) -> Result<Self> {
        if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
            return Err(Error::EmptyInput);
        }
        let t = groups.len();
        let mut refs = 0;
        let trees = Frame::BOTH.map(|frame| {
            let mut nodes = Vec::new();
            build(&mut nodes, pos, groups, frame, mode, 0, t + 1, &mut refs);
            nodes
        });
        Ok(GroupMaxIndex { t, trees, refs })
    }

    pub fn group_count(&self) -> usize {
        self.t
    }

    /// Plane references stored per frame.
    pub fn stored_refs(&self) -> usize {
        self.refs / 2
    }

    pub fn first_nonempty_group(&self, h: &HalfspaceQuery) -> Result<GroupHit> {
        let (frame, q) = h.dual();
        let nodes = &self.trees[frame.index()];
        let mut u = 0;
        let mut calls = 0;
        let mut steps = 0;
        while let Some((l, r)) = nodes[u].children {
            calls += 1;
            let env = nodes[u].left_env.as_ref().unwrap();
            u = if env.envelope_at_or_below(q, &mut steps) { l } else { r };
        }
        let group = nodes[u].lo;
        debug_assert_eq!(nodes[u].hi, group + 1);
        if group == self.t {
            return Err(Error::NotFound);
        }
        Ok(GroupHit { group, envelope_calls: calls, steps })
    }
}

#[allow(clippy::too_many_arguments)]
fn build(
    nodes: &mut Vec<Node>,
    pos: &[[f64; 3]],
    groups: &[Vec<usize>],
    frame: Frame,
    mode: LocateMode,
    lo: usize,
    hi: usize,
    refs: &mut usize,
) -> usize {
    let id = nodes.len();
    nodes.push(Node { lo, hi, left_env: None, children: None });
    if hi - lo >= 2 {
        let mid = (lo + hi) / 2;
        let planes: Vec<_> = groups[lo..mid].iter().flatten().map(|&i| dual_plane(pos[i], frame)).collect();
        *refs += planes.len();
        let env = EnvelopeIndex::with_mode(&planes, mode).expect("left half is nonempty");
        let l = build(nodes, pos, groups, frame, mode, lo, mid, refs);
        let r = build(nodes, pos, groups, frame, mode, mid, hi, refs);
        nodes[id].left_env = Some(env);
        nodes[id].children = Some((l, r));
    }
    id
}

/// Maximum-weight point in a halfspace: group search over singleton groups
/// ordered by weight (descending, ties by id).
#[derive(Debug, Clone)]
pub struct RangeMaxIndex {
    order: Vec<usize>,
    index: GroupMaxIndex,
}

impl RangeMaxIndex {
    pub fn new(data: &Dataset) -> Result<Self> {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.sort_by(|&a, &b| data.weight(b).total_cmp(&data.weight(a)).then(a.cmp(&b)));
        let pos: Vec<[f64; 3]> = data.points().iter().map(|p| p.pos).collect();
        let groups: Vec<Vec<usize>> = order.iter().map(|&i| vec![i]).collect();
        Ok(RangeMaxIndex { index: GroupMaxIndex::new(&pos, &groups)?, order })
    }

    pub fn query(&self, h: &HalfspaceQuery) -> Result<usize> {
        Ok(self.order[self.index.first_nonempty_group(h)?.group])
    }
}
