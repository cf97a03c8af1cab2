//! The Carleson-type covering test `∫_0^r N_ε(J ∩ E) dε <= c r` over dyadic
//! arcs `J` of length `r`.
//!
//! `ε -> N_ε` is a nonincreasing step function, integrated exactly: whenever
//! `ε` is below the largest gap `G` of a piece, the greedy cover never bridges
//! that gap and `N_ε` is the sum over the two sides. Splitting at largest gaps
//! gives a Cartesian tree over the gap sequence. Every subtree of the whole set
//! stores `∫_floor^G N` and its (short) step function above `G`; a dyadic arc
//! only recomputes the subtrees cut by its endpoints.

use serde::{Deserialize, Serialize};

use super::{IntervalSet, View};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSetOptions {
    /// Smallest resolved scale; `N_ε` is frozen at `N_floor` below it.
    pub floor: f64,
    /// The verdict compares the constant at `floor` with the constant at
    /// `floor * 10^probe_decades`.
    pub probe_decades: f64,
    /// Growth per e-fold of `1/floor` above which the set fails.
    pub growth_threshold: f64,
}

impl KSetOptions {
    pub fn new(floor: f64) -> Self {
        KSetOptions {
            floor,
            probe_decades: 3.0,
            growth_threshold: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSetReport {
    /// `sup_J (1/|J|) ∫_0^{|J|} N_ε(J ∩ E) dε` at the floor.
    pub constant: f64,
    /// The same supremum with the coarser floor.
    pub coarse_constant: f64,
    /// `(constant - coarse_constant) / ln(10^probe_decades)`.
    pub growth: f64,
    pub pass: bool,
    /// The maximizing arc at the floor.
    pub argmax: (f64, f64),
    pub arcs: usize,
    pub floor: f64,
}

pub fn kset_check(e: &IntervalSet, opts: KSetOptions) -> Result<KSetReport> {
    if !(opts.floor > 0.0) || !(opts.probe_decades > 0.0) {
        return Err(Error::Invalid("floor and probe_decades must be positive".into()));
    }
    let fine = sup_constant(e, opts.floor);
    let coarse = sup_constant(e, opts.floor * 10f64.powf(opts.probe_decades));
    let growth = (fine.0 - coarse.0) / (opts.probe_decades * 10f64.ln());
    Ok(KSetReport {
        constant: fine.0,
        coarse_constant: coarse.0,
        growth,
        pass: growth < opts.growth_threshold,
        argmax: fine.1,
        arcs: fine.2,
        floor: opts.floor,
    })
}

/// Sup over dyadic arcs of the hull down to length `floor`.
fn sup_constant(e: &IntervalSet, floor: f64) -> (f64, (f64, f64), usize) {
    let tree = GapTree::new(e.intervals(), floor);
    let (lo, hi) = e.hull();
    let best = walk(&tree, lo, (hi - lo).max(floor), floor, 0);
    (best.value, best.arc, best.arcs)
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    arc: (f64, f64),
    arcs: usize,
}

impl Best {
    const NONE: Best = Best {
        value: f64::NEG_INFINITY,
        arc: (0.0, 0.0),
        arcs: 0,
    };

    fn merge(self, other: Best) -> Best {
        let arcs = self.arcs + other.arcs;
        let win = if other.value > self.value || (other.value == self.value && other.arc.0 < self.arc.0) {
            other
        } else {
            self
        };
        Best { arcs, ..win }
    }
}

/// Depth-first over the dyadic arcs meeting the set; the first few levels fork.
fn walk(tree: &GapTree, a: f64, len: f64, floor: f64, level: u32) -> Best {
    let b = a + len;
    if tree.range(a, b).is_none() {
        return Best::NONE;
    }
    let here = Best {
        value: tree.arc_constant(a, b),
        arc: (a, b),
        arcs: 1,
    };
    if len / 2.0 < floor {
        return here;
    }
    let h = len / 2.0;
    let (left, right) = if level < 8 {
        rayon::join(|| walk(tree, a, h, floor, level + 1), || walk(tree, a + h, h, floor, level + 1))
    } else {
        (walk(tree, a, h, floor, level + 1), walk(tree, a + h, h, floor, level + 1))
    };
    here.merge(left).merge(right)
}

/// Piecewise-constant nonincreasing `N(ε)` from `start` upward; the last
/// piece has value 1 and extends to infinity.
#[derive(Debug, Clone, Default)]
struct Steps {
    pieces: Vec<(f64, u64)>,
}

impl Steps {
    fn integral(&self, a: f64, u: f64) -> f64 {
        let mut total = 0.0;
        for (i, &(start, n)) in self.pieces.iter().enumerate() {
            let end = self.pieces.get(i + 1).map_or(f64::INFINITY, |p| p.0);
            let (x, y) = (start.max(a), end.min(u));
            if y > x {
                total += n as f64 * (y - x);
            }
            if end >= u {
                break;
            }
        }
        total
    }

    /// Step function of a view on `[a, ∞)`.
    fn build(view: &View, a: f64) -> Steps {
        let span = view.span();
        let mut pieces = Vec::new();
        if a < span {
            let t2 = view.two_cover_threshold();
            if a < t2 {
                refine(view, a, view.cover_count(a), t2, 2, &mut pieces);
            }
            pieces.push((t2.max(a), 2));
        }
        pieces.push((span.max(a), 1));
        pieces.dedup_by(|next, prev| next.1 == prev.1);
        Steps { pieces }
    }
}

/// Bisects `[lo, hi)` for the breakpoints of the greedy count, appending
/// `(start, value)` pieces.
fn refine(view: &View, lo: f64, nlo: u64, hi: f64, nhi: u64, out: &mut Vec<(f64, u64)>) {
    if nlo == nhi || hi - lo <= 1e-10 * hi {
        out.push((lo, nlo));
        return;
    }
    let mid = 0.5 * (lo + hi);
    let nmid = view.cover_count(mid);
    refine(view, lo, nlo, mid, nmid, out);
    refine(view, mid, nmid, hi, nhi, out);
}

/// `∫_a^b max(1, ceil(L/ε)) dε` in closed form.
fn leaf_integral(len: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if len <= 0.0 {
        return b - a;
    }
    let mut total = (b - a.max(len)).max(0.0);
    let top = b.min(len);
    if top > a {
        let ma = (len / a).ceil();
        let mb = (len / top).ceil().max(1.0);
        if ma == mb {
            total += ma * (top - a);
        } else {
            total += ma * (len / (ma - 1.0) - a);
            total += mb * (top - len / mb);
            total += len * (harmonic(ma - 2.0) - harmonic(mb - 1.0));
        }
    }
    total
}

fn harmonic(n: f64) -> f64 {
    if n < 1.0 {
        0.0
    } else if n < 64.0 {
        (1..=n as u64).map(|k| 1.0 / k as f64).sum()
    } else {
        let inv = 1.0 / n;
        n.ln() + 0.577_215_664_901_532_9 + 0.5 * inv - inv * inv / 12.0 + inv.powi(4) / 120.0
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf(usize),
    Gap(usize),
}

struct Memo {
    lo: usize,
    hi: usize,
    below: f64,
    start: f64,
    steps: Steps,
}

struct GapTree<'a> {
    ivs: &'a [(f64, f64)],
    gaps: Vec<f64>,
    sparse: Vec<Vec<u32>>,
    memo: Vec<Memo>,
    floor: f64,
}

impl<'a> GapTree<'a> {
    fn new(ivs: &'a [(f64, f64)], floor: f64) -> Self {
        let gaps: Vec<f64> = ivs.windows(2).map(|w| w[1].0 - w[0].1).collect();
        let m = gaps.len();
        let mut sparse = vec![(0..m as u32).collect::<Vec<u32>>()];
        let mut w = 1;
        while 2 * w <= m {
            let prev = sparse.last().unwrap();
            let row = (0..=m - 2 * w)
                .map(|i| Self::larger(&gaps, prev[i], prev[i + w]))
                .collect();
            sparse.push(row);
            w *= 2;
        }
        let mut tree = GapTree {
            ivs,
            gaps,
            sparse,
            memo: Vec::new(),
            floor,
        };
        tree.build_memo();
        tree
    }

    fn larger(gaps: &[f64], a: u32, b: u32) -> u32 {
        // ties go to the left gap so the order is total
        if gaps[b as usize] > gaps[a as usize] {
            b
        } else {
            a
        }
    }

    fn greater(&self, a: usize, b: usize) -> bool {
        self.gaps[a] > self.gaps[b] || (self.gaps[a] == self.gaps[b] && a < b)
    }

    /// Largest gap among gap indices `l..=r`.
    fn argmax(&self, l: usize, r: usize) -> usize {
        let k = (usize::BITS - 1 - (r - l + 1).leading_zeros()) as usize;
        let row = &self.sparse[k];
        Self::larger(&self.gaps, row[l], row[r + 1 - (1 << k)]) as usize
    }

    fn node_for(&self, l: usize, r: usize) -> Node {
        if l == r {
            Node::Leaf(l)
        } else {
            Node::Gap(self.argmax(l, r - 1))
        }
    }

    fn build_memo(&mut self) {
        let m = self.gaps.len();
        // interval ranges from previous/next greater gaps
        let mut prev = vec![usize::MAX; m];
        let mut next = vec![m; m];
        let mut stack: Vec<usize> = Vec::new();
        for s in 0..m {
            while let Some(&t) = stack.last() {
                if self.greater(t, s) {
                    break;
                }
                next[t] = s;
                stack.pop();
            }
            prev[s] = stack.last().copied().unwrap_or(usize::MAX);
            stack.push(s);
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if self.greater(a, b) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Less
            }
        });
        self.memo = (0..m)
            .map(|s| Memo {
                lo: prev[s].wrapping_add(1),
                hi: next[s],
                below: 0.0,
                start: 0.0,
                steps: Steps::default(),
            })
            .collect();
        for s in order {
            let (lo, hi) = (self.memo[s].lo, self.memo[s].hi);
            let g = self.gaps[s];
            let start = g.max(self.floor);
            let below = if g >= self.floor {
                self.t_node(self.node_for(lo, s), g) + self.t_node(self.node_for(s + 1, hi), g)
            } else {
                0.0
            };
            let steps = Steps::build(&View::whole(&self.ivs[lo..=hi]), start);
            let memo = &mut self.memo[s];
            memo.below = below;
            memo.start = start;
            memo.steps = steps;
        }
    }

    /// `∫_floor^u N_ε(node) dε` for a subtree of the whole set.
    fn t_node(&self, node: Node, u: f64) -> f64 {
        if u <= self.floor {
            return 0.0;
        }
        match node {
            Node::Leaf(i) => leaf_integral(self.ivs[i].1 - self.ivs[i].0, self.floor, u),
            Node::Gap(s) => {
                let m = &self.memo[s];
                if u >= m.start {
                    m.below + m.steps.integral(m.start, u)
                } else {
                    self.t_node(self.node_for(m.lo, s), u) + self.t_node(self.node_for(s + 1, m.hi), u)
                }
            }
        }
    }

    /// Index range of intervals meeting `[a, b]`.
    fn range(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        let i0 = self.ivs.partition_point(|iv| iv.1 < a);
        let i1 = self.ivs.partition_point(|iv| iv.0 <= b);
        (i0 < i1).then(|| (i0, i1 - 1))
    }

    /// `(1/r)(floor N_floor + ∫_floor^r N_ε dε)` for `J = [a, b]`.
    fn arc_constant(&self, a: f64, b: f64) -> f64 {
        let Some((i0, i1)) = self.range(a, b) else {
            return 0.0;
        };
        let clip = Clip {
            i0,
            i1,
            lo: self.ivs[i0].0.max(a),
            hi: self.ivs[i1].1.min(b),
        };
        let r = b - a;
        let view = clip.view(self.ivs, i0, i1);
        let head = self.floor.min(r) * view.cover_count(self.floor) as f64;
        (head + self.t_clipped(&clip, i0, i1, r)) / r
    }

    fn t_clipped(&self, clip: &Clip, l: usize, r: usize, u: f64) -> f64 {
        if u <= self.floor {
            return 0.0;
        }
        let view = clip.view(self.ivs, l, r);
        if l == r {
            return leaf_integral(view.span(), self.floor, u);
        }
        let s = self.argmax(l, r - 1);
        let g = self.gaps[s];
        let start = g.max(self.floor);
        let side = |lo: usize, hi: usize, u: f64| {
            if lo > clip.i0 && hi < clip.i1 {
                self.t_node(self.node_for(lo, hi), u)
            } else {
                self.t_clipped(clip, lo, hi, u)
            }
        };
        if u >= start {
            let below = if g >= self.floor { side(l, s, g) + side(s + 1, r, g) } else { 0.0 };
            below + Steps::build(&view, start).integral(start, u)
        } else {
            side(l, s, u) + side(s + 1, r, u)
        }
    }
}

struct Clip {
    i0: usize,
    i1: usize,
    lo: f64,
    hi: f64,
}

impl Clip {
    fn view<'a>(&self, ivs: &'a [(f64, f64)], l: usize, r: usize) -> View<'a> {
        let lo = if l == self.i0 { self.lo } else { ivs[l].0 };
        let hi = if r == self.i1 { self.hi } else { ivs[r].1 };
        View::clipped(&ivs[l..=r], lo, hi)
    }
}
