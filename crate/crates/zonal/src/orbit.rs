//! Orbit enumeration by word length, partial Poincaré sums, orbit counting,
//! and critical-exponent estimation.
//!
//! Every element of an essentially free group has a unique normal form, and
//! this module walks normal forms directly: each word of length `≤ n` is
//! reached along exactly one path of unit steps, so enumeration is exact —
//! no hashing, no deduplication, no discreteness heuristics. The canonical
//! path builds syllables left to right; inside a parabolic syllable it fills
//! coordinates in increasing index order, each coordinate by unit steps of a
//! fixed sign. Every prefix of such a path is itself a normal word, so the
//! search tree *is* the Cayley ball, and matrices grow by a single generator
//! product per edge.
//!
//! On top of the walk sit the quantities of interest:
//!
//! * [`partial_sum`] — the partial Poincaré sums
//!   `P_n(z, w, s) = Σ_{|g| ≤ n} e^{−s·d(z, g w)}`, with compensated
//!   summation;
//! * [`restricted_sum_d`] — the same sum restricted to words that do not
//!   start with a deep cusp excursion (first syllable of a maximal-rank
//!   parabolic factor with ℓ1 ≥ 2 excluded); the first-syllable criterion is
//!   the combinatorial surrogate for restricting orbit points to the complement
//!   of the horoball neighborhoods excised by doubled parabolic generators;
//! * [`coset_sum`] — the sum over one first-syllable coset, the per-coset
//!   estimate in the convolution analysis; together with the restricted sum
//!   these partition `P_n` exactly;
//! * [`counting_function`] / [`delta_estimate`] — the orbit-counting function
//!   `N(R)` and a least-squares estimate of the critical exponent `δ` from
//!   `log N(R) ≈ δ·R + c`.
//!
//! Parallel enumeration partitions the tree at a shallow frontier and merges
//! per-partition compensated sums in a fixed order, so results are
//! byte-identical across runs *and* across thread counts.

use rayon::prelude::*;

use crate::hyperbolic::{distance, HPoint, Mobius};
use crate::presentation::{
    sphere_counts_by_length, GroupPresentation, NormalWord, Syllable,
};
use crate::{Error, Result};

/// Subtrees are split off for parallel execution at this word length.
const FRONTIER_DEPTH: u32 = 3;

/// Compensated (Kahan) accumulator for long positive sums.
///
/// Adding `n` terms accumulates error `O(ε)` rather than `O(nε)`; with tens
/// of millions of exponentially decaying terms the relative error of the
/// plain sum would already be visible against the 1e−10 partition-identity
/// tolerance.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> KahanSum {
        KahanSum::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    /// Folds another accumulator in (used when merging per-partition sums).
    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// One visited orbit point: the word, its image `g(w)`, and `d(z, g(w))`.
#[derive(Clone, Debug)]
pub struct OrbitRecord {
    pub word: NormalWord,
    pub point: HPoint,
    pub dist: f64,
}

/// How a canonical unit step changes the current word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MoveKind {
    /// One more step on the coordinate the syllable ended with.
    Extend,
    /// First step on a strictly higher coordinate of the same syllable.
    NewCoord,
    /// First step of a fresh syllable on a different factor.
    NewSyllable,
}

#[derive(Clone, Copy, Debug)]
struct Move {
    factor: u32,
    coord: u32,
    sign: i8,
    kind: MoveKind,
}

/// Where the canonical path currently stands.
#[derive(Clone, Copy, Debug)]
enum Tail {
    /// Identity: any factor may open.
    Root,
    /// An open syllable that ended with (factor, coord, sign).
    Open { factor: u32, coord: u32, sign: i8 },
    /// A syllable on `factor` that may not be extended (coset enumeration
    /// keeps the first syllable frozen).
    Closed { factor: u32 },
}

#[derive(Clone, Copy)]
struct RecState {
    len: u32,
    /// Whether the open syllable is the word's first.
    first_syllable: bool,
}

/// Everything an enumeration engine maintains along the path.
trait EngineCtx {
    /// Push one unit step and visit the resulting word of length `st.len`.
    fn apply(&mut self, gp: &GroupPresentation, mv: &Move, st: RecState) -> Result<()>;
    /// Undo the step.
    fn retract(&mut self);
}

/// Enumerates the canonical moves out of `tail` in a fixed order
/// (extend, higher coordinates, then other factors), which both fixes the
/// visiting order of the serial stream and pins the parallel merge order.
fn for_each_move(
    gp: &GroupPresentation,
    tail: Tail,
    skip_same_syllable: bool,
    mut f: impl FnMut(Move) -> Result<()>,
) -> Result<()> {
    let nf = gp.factors.len() as u32;
    let same_factor: Option<u32> = match tail {
        Tail::Root => None,
        Tail::Open { factor, coord, sign } => {
            if !skip_same_syllable {
                f(Move { factor, coord, sign, kind: MoveKind::Extend })?;
                let rank = gp.factors[factor as usize].rank() as u32;
                for c in (coord + 1)..rank {
                    for s in [1i8, -1] {
                        f(Move { factor, coord: c, sign: s, kind: MoveKind::NewCoord })?;
                    }
                }
            }
            Some(factor)
        }
        Tail::Closed { factor } => Some(factor),
    };
    for factor in 0..nf {
        if Some(factor) == same_factor {
            continue;
        }
        let rank = gp.factors[factor as usize].rank() as u32;
        for coord in 0..rank {
            for s in [1i8, -1] {
                f(Move { factor, coord, sign: s, kind: MoveKind::NewSyllable })?;
            }
        }
    }
    Ok(())
}

struct DfsOpts {
    /// Skip words whose first syllable is a maximal-rank parabolic syllable
    /// of ℓ1 ≥ 2 (the restricted sum).
    restricted: bool,
    /// Bitmask of maximal-rank parabolic factor indices.
    max_rank_mask: u64,
}

impl DfsOpts {
    fn full() -> DfsOpts {
        DfsOpts { restricted: false, max_rank_mask: 0 }
    }

    fn restricted(gp: &GroupPresentation) -> DfsOpts {
        let mut mask = 0u64;
        for i in gp.max_rank_parabolic_factors() {
            mask |= 1 << i;
        }
        DfsOpts { restricted: true, max_rank_mask: mask }
    }
}

/// Depth-first walk of all canonical extensions of the current state.
/// `st.len` is the length of the *current* word; children have `st.len + 1`.
fn rec<C: EngineCtx>(
    gp: &GroupPresentation,
    n_max: u32,
    tail: Tail,
    st: RecState,
    opts: &DfsOpts,
    ctx: &mut C,
) -> Result<()> {
    if st.len >= n_max {
        return Ok(());
    }
    // Restriction prunes whole subtrees: once the first syllable of a
    // maximal-rank parabolic factor reaches ℓ1 = 2, every descendant shares
    // that first syllable.
    let skip_same = opts.restricted
        && st.first_syllable
        && matches!(tail, Tail::Open { factor, .. } if opts.max_rank_mask >> factor & 1 == 1);
    for_each_move(gp, tail, skip_same, |mv| {
        let child = RecState {
            len: st.len + 1,
            first_syllable: match mv.kind {
                MoveKind::NewSyllable => matches!(tail, Tail::Root),
                _ => st.first_syllable,
            },
        };
        ctx.apply(gp, &mv, child)?;
        let child_tail = Tail::Open { factor: mv.factor, coord: mv.coord, sign: mv.sign };
        let r = rec(gp, n_max, child_tail, child, opts, ctx);
        ctx.retract();
        r
    })
}

// ---------------------------------------------------------------------------
// Engines
// ---------------------------------------------------------------------------

/// Counting only: no matrices, no geometry. Fast path for exact-count
/// verification.
struct CountCtx<'a> {
    per_len: &'a mut Vec<u128>,
}

impl EngineCtx for CountCtx<'_> {
    fn apply(&mut self, _gp: &GroupPresentation, _mv: &Move, st: RecState) -> Result<()> {
        self.per_len[st.len as usize] += 1;
        Ok(())
    }

    fn retract(&mut self) {}
}

/// Geometry: maintains the matrix stack, applies each word to the base point
/// `w`, and hands `(length, distance)` to a sink.
struct GeomCtx<'a, F: FnMut(u32, f64) -> Result<()>> {
    stack: Vec<Mobius>,
    z: &'a HPoint,
    w: &'a HPoint,
    sink: F,
}

impl<'a, F: FnMut(u32, f64) -> Result<()>> GeomCtx<'a, F> {
    fn new(z: &'a HPoint, w: &'a HPoint, start: Mobius, sink: F) -> GeomCtx<'a, F> {
        GeomCtx { stack: vec![start], z, w, sink }
    }

    fn top(&self) -> &Mobius {
        self.stack.last().expect("stack never empty")
    }

    /// Extends the matrix stack without evaluating or visiting — for
    /// frontier nodes whose geometry is recomputed by their own task.
    fn push_only(&mut self, gp: &GroupPresentation, mv: &Move) {
        let gen = gp.factors[mv.factor as usize].generator(mv.coord as usize);
        let step = if mv.sign > 0 { *gen } else { gen.inverse() };
        let m = self.top().compose(&step);
        self.stack.push(m);
    }
}

impl<F: FnMut(u32, f64) -> Result<()>> EngineCtx for GeomCtx<'_, F> {
    fn apply(&mut self, gp: &GroupPresentation, mv: &Move, st: RecState) -> Result<()> {
        let gen = gp.factors[mv.factor as usize].generator(mv.coord as usize);
        let step = if mv.sign > 0 { *gen } else { gen.inverse() };
        let m = self.top().compose(&step);
        let point = m.apply(self.w).map_err(|e| match e {
            Error::HeightUnderflow { .. } => {
                Error::HeightUnderflow { word_length: Some(st.len) }
            }
            other => other,
        })?;
        let d = distance(self.z, &point)?;
        self.stack.push(m);
        (self.sink)(st.len, d)
    }

    fn retract(&mut self) {
        self.stack.pop();
    }
}

/// Full records: geometry plus the syllable stack, for the streaming API.
struct WordCtx<'a, F: FnMut(&OrbitRecord) -> Result<()>> {
    stack: Vec<Mobius>,
    syllables: Vec<Syllable>,
    z: &'a HPoint,
    w: &'a HPoint,
    sink: F,
}

impl<F: FnMut(&OrbitRecord) -> Result<()>> EngineCtx for WordCtx<'_, F> {
    fn apply(&mut self, gp: &GroupPresentation, mv: &Move, st: RecState) -> Result<()> {
        let gen = gp.factors[mv.factor as usize].generator(mv.coord as usize);
        let step = if mv.sign > 0 { *gen } else { gen.inverse() };
        let m = self.stack.last().expect("nonempty").compose(&step);
        let point = m.apply(self.w).map_err(|e| match e {
            Error::HeightUnderflow { .. } => {
                Error::HeightUnderflow { word_length: Some(st.len) }
            }
            other => other,
        })?;
        let d = distance(self.z, &point)?;
        self.stack.push(m);
        match mv.kind {
            MoveKind::NewSyllable => {
                let rank = gp.factors[mv.factor as usize].rank();
                let mut exps = vec![0i64; rank];
                exps[mv.coord as usize] = mv.sign as i64;
                self.syllables.push(Syllable::new(mv.factor as usize, exps));
            }
            MoveKind::Extend | MoveKind::NewCoord => {
                let last = self.syllables.last_mut().expect("open syllable");
                last.exponents[mv.coord as usize] += mv.sign as i64;
            }
        }
        let record = OrbitRecord {
            word: NormalWord::new(self.syllables.clone()),
            point,
            dist: d,
        };
        (self.sink)(&record)
    }

    fn retract(&mut self) {
        self.stack.pop();
        let drop_syllable = {
            let last = self.syllables.last_mut().expect("open syllable");
            let mut l1 = 0u64;
            let mut top_coord = 0usize;
            for (i, e) in last.exponents.iter().enumerate() {
                if *e != 0 {
                    top_coord = i;
                }
                l1 += e.unsigned_abs();
            }
            if l1 == 1 {
                true
            } else {
                last.exponents[top_coord] -= last.exponents[top_coord].signum();
                false
            }
        };
        if drop_syllable {
            self.syllables.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Frontier split for deterministic parallelism
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct FrontierNode {
    tail: Tail,
    first_syllable: bool,
    matrix: Mobius,
    len: u32,
}

/// Runs the walk up to `depth`, visiting shallow words through `sink` and
/// snapshotting every word at exactly `depth` for parallel continuation.
struct SplitCtx<'a, F: FnMut(u32, f64) -> Result<()>> {
    geom: GeomCtx<'a, F>,
    depth: u32,
    frontier: Vec<FrontierNode>,
}

impl<F: FnMut(u32, f64) -> Result<()>> EngineCtx for SplitCtx<'_, F> {
    fn apply(&mut self, gp: &GroupPresentation, mv: &Move, st: RecState) -> Result<()> {
        if st.len == self.depth {
            // Snapshot only: the frontier word is visited by its own task.
            self.geom.push_only(gp, mv);
            self.frontier.push(FrontierNode {
                tail: Tail::Open { factor: mv.factor, coord: mv.coord, sign: mv.sign },
                first_syllable: st.first_syllable,
                matrix: *self.geom.top(),
                len: st.len,
            });
            Ok(())
        } else {
            self.geom.apply(gp, mv, st)
        }
    }

    fn retract(&mut self) {
        self.geom.retract();
    }
}

/// Per-length tallies of a (partial) Poincaré sum.
#[derive(Clone)]
struct LengthTally {
    count: Vec<u128>,
    sum: Vec<KahanSum>,
}

impl LengthTally {
    fn new(n_max: u32) -> LengthTally {
        LengthTally {
            count: vec![0; n_max as usize + 1],
            sum: vec![KahanSum::new(); n_max as usize + 1],
        }
    }

    fn merge(&mut self, other: &LengthTally) {
        for (c, oc) in self.count.iter_mut().zip(&other.count) {
            *c += oc;
        }
        for (s, os) in self.sum.iter_mut().zip(&other.sum) {
            s.merge(os);
        }
    }
}

/// Shared driver: enumerate all words of length 1..=n_max (identity excluded;
/// callers handle length 0), tallying `e^{−s·d}` per length. Splits at the
/// frontier and merges partition results in frontier order, so the output is
/// byte-identical for every thread count.
fn poincare_tally(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    s: f64,
    n_max: u32,
    opts: &DfsOpts,
) -> Result<LengthTally> {
    let mut tally = LengthTally::new(n_max);
    if n_max == 0 {
        return Ok(tally);
    }

    let depth = FRONTIER_DEPTH.min(n_max);
    let mut shallow = LengthTally::new(n_max);
    let frontier = {
        let mut split = SplitCtx {
            geom: GeomCtx::new(z, w, Mobius::identity(), |len, d| {
                shallow.count[len as usize] += 1;
                shallow.sum[len as usize].add((-s * d).exp());
                Ok(())
            }),
            depth,
            frontier: Vec::new(),
        };
        rec(
            gp,
            depth,
            Tail::Root,
            RecState { len: 0, first_syllable: false },
            opts,
            &mut split,
        )?;
        split.frontier
    };
    tally.merge(&shallow);

    let results: Vec<Result<LengthTally>> = frontier
        .par_iter()
        .map(|node| {
            let mut local = LengthTally::new(n_max);
            // The frontier word itself.
            let point = node.matrix.apply(w).map_err(|e| match e {
                Error::HeightUnderflow { .. } => {
                    Error::HeightUnderflow { word_length: Some(node.len) }
                }
                other => other,
            })?;
            let d = distance(z, &point)?;
            local.count[node.len as usize] += 1;
            local.sum[node.len as usize].add((-s * d).exp());
            // Its subtree.
            let mut geom = GeomCtx::new(z, w, node.matrix, |len: u32, d: f64| {
                local.count[len as usize] += 1;
                local.sum[len as usize].add((-s * d).exp());
                Ok(())
            });
            rec(
                gp,
                n_max,
                node.tail,
                RecState { len: node.len, first_syllable: node.first_syllable },
                opts,
                &mut geom,
            )?;
            drop(geom);
            Ok(local)
        })
        .collect();
    for r in results {
        tally.merge(&r?);
    }
    Ok(tally)
}

// ---------------------------------------------------------------------------
// Public enumeration API
// ---------------------------------------------------------------------------

/// Streams every orbit record of word length `≤ n_max` to `visitor`, in the
/// canonical depth-first order, starting with the identity. Serialized
/// delivery: the visitor is called from the calling thread only.
///
/// # Examples
///
/// ```
/// use zonal::hyperbolic::{HPoint, Model};
/// use zonal::presentation::examples;
///
/// let gp = examples::gamma2();
/// let base = HPoint::base(Model::H2);
/// let mut n = 0u64;
/// zonal::orbit::enumerate(&gp, &base, &base, 2, |_rec| {
///     n += 1;
///     Ok(())
/// })?;
/// assert_eq!(n, 17); // 1 + 4 + 12
/// # Ok::<(), zonal::Error>(())
/// ```
pub fn enumerate(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    n_max: u32,
    mut visitor: impl FnMut(&OrbitRecord) -> Result<()>,
) -> Result<()> {
    let identity = OrbitRecord {
        word: NormalWord::identity(),
        point: *w,
        dist: distance(z, w)?,
    };
    visitor(&identity)?;
    let mut ctx = WordCtx {
        stack: vec![Mobius::identity()],
        syllables: Vec::new(),
        z,
        w,
        sink: visitor,
    };
    rec(
        gp,
        n_max,
        Tail::Root,
        RecState { len: 0, first_syllable: false },
        &DfsOpts::full(),
        &mut ctx,
    )
}

/// Parallel variant of [`enumerate`]: the visitor must tolerate concurrent
/// invocation from worker threads; delivery order is unspecified.
pub fn enumerate_parallel(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    n_max: u32,
    visitor: impl Fn(&OrbitRecord) -> Result<()> + Sync,
) -> Result<()> {
    let identity = OrbitRecord {
        word: NormalWord::identity(),
        point: *w,
        dist: distance(z, w)?,
    };
    visitor(&identity)?;
    if n_max == 0 {
        return Ok(());
    }
    let depth = FRONTIER_DEPTH.min(n_max);

    // Serial prefix: words shorter than the frontier, plus the snapshots.
    struct PrefixCtx<'a, F: Fn(&OrbitRecord) -> Result<()>> {
        words: WordCtx<'a, &'a mut dyn FnMut(&OrbitRecord) -> Result<()>>,
        depth: u32,
        frontier: Vec<(FrontierNode, Vec<Syllable>)>,
        _marker: std::marker::PhantomData<F>,
    }
    impl<F: Fn(&OrbitRecord) -> Result<()>> EngineCtx for PrefixCtx<'_, F> {
        fn apply(&mut self, gp: &GroupPresentation, mv: &Move, st: RecState) -> Result<()> {
            self.words.apply(gp, mv, st)?;
            if st.len == self.depth {
                self.frontier.push((
                    FrontierNode {
                        tail: Tail::Open { factor: mv.factor, coord: mv.coord, sign: mv.sign },
                        first_syllable: st.first_syllable,
                        matrix: *self.words.stack.last().expect("nonempty"),
                        len: st.len,
                    },
                    self.words.syllables.clone(),
                ));
            }
            Ok(())
        }
        fn retract(&mut self) {
            self.words.retract();
        }
    }

    let mut emit_shallow = |record: &OrbitRecord| {
        if record.word.word_length() < depth as u64 {
            visitor(record)
        } else {
            Ok(()) // frontier words are delivered by their own task
        }
    };
    let frontier = {
        let mut prefix = PrefixCtx::<'_, _> {
            words: WordCtx {
                stack: vec![Mobius::identity()],
                syllables: Vec::new(),
                z,
                w,
                sink: &mut emit_shallow,
            },
            depth,
            frontier: Vec::new(),
            _marker: std::marker::PhantomData::<fn(&OrbitRecord) -> Result<()>>,
        };
        rec(
            gp,
            depth,
            Tail::Root,
            RecState { len: 0, first_syllable: false },
            &DfsOpts::full(),
            &mut prefix,
        )?;
        prefix.frontier
    };

    frontier
        .into_par_iter()
        .map(|(node, syllables)| {
            let point = node.matrix.apply(w)?;
            let d = distance(z, &point)?;
            visitor(&OrbitRecord {
                word: NormalWord::new(syllables.clone()),
                point,
                dist: d,
            })?;
            let mut ctx = WordCtx {
                stack: vec![node.matrix],
                syllables,
                z,
                w,
                sink: |r: &OrbitRecord| visitor(r),
            };
            rec(
                gp,
                n_max,
                node.tail,
                RecState { len: node.len, first_syllable: node.first_syllable },
                &DfsOpts::full(),
                &mut ctx,
            )
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(())
}

/// Exact per-length counts from the enumeration itself (no matrices built).
/// Cross-checks the closed-form recursion
/// [`sphere_counts_by_length`](crate::presentation::sphere_counts_by_length).
pub fn enumeration_counts(gp: &GroupPresentation, n_max: u32) -> Result<Vec<u128>> {
    let mut per_len = vec![0u128; n_max as usize + 1];
    per_len[0] = 1;
    let mut ctx = CountCtx { per_len: &mut per_len };
    rec(
        gp,
        n_max,
        Tail::Root,
        RecState { len: 0, first_syllable: false },
        &DfsOpts::full(),
        &mut ctx,
    )?;
    Ok(per_len)
}

/// One row of a [`PartialSumTable`]: cumulative count and sum at cutoff `n`.
#[derive(Clone, Copy, Debug)]
pub struct SumEntry {
    pub n: u32,
    /// Number of words with `|g| ≤ n`.
    pub count: u128,
    /// Partial sum value at cutoff `n`.
    pub value: f64,
}

/// Partial Poincaré sums `P_n(z, w, s)` for `n = 0..=n_max`.
#[derive(Clone, Debug)]
pub struct PartialSumTable {
    pub s: f64,
    pub z: HPoint,
    pub w: HPoint,
    pub entries: Vec<SumEntry>,
}

impl PartialSumTable {
    /// `P_n` for a given cutoff.
    pub fn value_at(&self, n: u32) -> f64 {
        self.entries[n as usize].value
    }
}

fn build_table(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    s: f64,
    n_max: u32,
    opts: &DfsOpts,
) -> Result<PartialSumTable> {
    assert!(s > 0.0, "Poincaré exponent must be positive");
    let tally = poincare_tally(gp, z, w, s, n_max, opts)?;
    let identity_term = (-s * distance(z, w)?).exp();
    let mut entries = Vec::with_capacity(n_max as usize + 1);
    let mut count: u128 = 1;
    let mut acc = KahanSum::new();
    acc.add(identity_term);
    entries.push(SumEntry { n: 0, count, value: acc.value() });
    for n in 1..=n_max {
        count += tally.count[n as usize];
        acc.merge(&tally.sum[n as usize]);
        entries.push(SumEntry { n, count, value: acc.value() });
    }
    Ok(PartialSumTable { s, z: *z, w: *w, entries })
}

/// Partial Poincaré sums `P_n(z, w, s) = Σ_{|g| ≤ n} e^{−s·d(z, g(w))}` for
/// every cutoff `n = 0..=n_max`.
///
/// Deterministic: identical inputs give identical bytes for any thread count.
pub fn partial_sum(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    s: f64,
    n_max: u32,
) -> Result<PartialSumTable> {
    build_table(gp, z, w, s, n_max, &DfsOpts::full())
}

/// The Poincaré sum restricted to words whose first syllable is *not* a
/// maximal-rank parabolic syllable of ℓ1 length ≥ 2 (identity included).
///
/// This keeps exactly the words that do not open with a deep excursion into a
/// maximal-rank cusp; the growth analysis predicts this restricted sum is
/// comparable to the return sequence `ν_n`.
pub fn restricted_sum_d(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    s: f64,
    n_max: u32,
) -> Result<PartialSumTable> {
    build_table(gp, z, w, s, n_max, &DfsOpts::restricted(gp))
}

/// Validates a coset prefix: a syllable of a maximal-rank parabolic factor
/// with `2 ≤ ℓ1 ≤ n_max`.
fn check_prefix(gp: &GroupPresentation, prefix: &Syllable, n_max: u32) -> Result<()> {
    let max_rank = gp.max_rank_parabolic_factors();
    if !max_rank.contains(&prefix.factor) {
        return Err(Error::InvalidPrefix {
            reason: format!(
                "factor {} is not a maximal-rank parabolic factor",
                prefix.factor
            ),
        });
    }
    if prefix.exponents.len() != gp.factors[prefix.factor].rank() {
        return Err(Error::InvalidPrefix {
            reason: format!(
                "exponent vector has {} entries for a rank-{} factor",
                prefix.exponents.len(),
                gp.factors[prefix.factor].rank()
            ),
        });
    }
    let k = prefix.l1();
    if k < 2 || k > n_max as u64 {
        return Err(Error::InvalidPrefix {
            reason: format!("ℓ1 length {k} outside [2, {n_max}]"),
        });
    }
    Ok(())
}

/// Sum of `e^{−s·d(z, g(w))}` over words whose first syllable equals `prefix`
/// exactly and `|g| ≤ n_max`.
///
/// The words in this coset are the prefix itself and its continuations by
/// syllables of other factors; together with [`restricted_sum_d`] over all
/// admissible prefixes they partition the full sum — see
/// [`max_rank_prefixes`].
pub fn coset_sum(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    s: f64,
    n_max: u32,
    prefix: &Syllable,
) -> Result<f64> {
    assert!(s > 0.0, "Poincaré exponent must be positive");
    check_prefix(gp, prefix, n_max)?;
    let word = NormalWord::new(vec![prefix.clone()]);
    let matrix = crate::presentation::matrix_of(&word, gp)?;
    let k = prefix.l1() as u32;

    let mut acc = KahanSum::new();
    let point = matrix.apply(w).map_err(|e| match e {
        Error::HeightUnderflow { .. } => Error::HeightUnderflow { word_length: Some(k) },
        other => other,
    })?;
    acc.add((-s * distance(z, &point)?).exp());

    let mut geom = GeomCtx::new(z, w, matrix, |_len: u32, d: f64| {
        acc.add((-s * d).exp());
        Ok(())
    });
    rec(
        gp,
        n_max,
        Tail::Closed { factor: prefix.factor as u32 },
        RecState { len: k, first_syllable: false },
        &DfsOpts::full(),
        &mut geom,
    )?;
    drop(geom);
    Ok(acc.value())
}

/// All admissible coset prefixes for [`coset_sum`]: syllables of maximal-rank
/// parabolic factors with `2 ≤ ℓ1 ≤ n_max`, in a fixed order.
pub fn max_rank_prefixes(gp: &GroupPresentation, n_max: u32) -> Vec<Syllable> {
    let mut out = Vec::new();
    for f in gp.max_rank_parabolic_factors() {
        let rank = gp.factors[f].rank();
        let mut exps = vec![0i64; rank];
        // Depth-first over coordinates; each coordinate takes any signed
        // value, total ℓ1 in [2, n_max].
        fn fill(
            f: usize,
            coord: usize,
            rank: usize,
            budget: u64,
            exps: &mut Vec<i64>,
            out: &mut Vec<Syllable>,
            l1_so_far: u64,
        ) {
            if coord == rank {
                if l1_so_far >= 2 {
                    out.push(Syllable::new(f, exps.clone()));
                }
                return;
            }
            let remaining = budget - l1_so_far;
            for mag in 0..=remaining {
                let signs: &[i64] = if mag == 0 { &[1] } else { &[1, -1] };
                for &sg in signs {
                    exps[coord] = sg * mag as i64;
                    fill(f, coord + 1, rank, budget, exps, out, l1_so_far + mag);
                }
            }
            exps[coord] = 0;
        }
        fill(f, 0, rank, n_max as u64, &mut exps, &mut out, 0);
    }
    out
}

// ---------------------------------------------------------------------------
// Orbit counting and δ estimation
// ---------------------------------------------------------------------------

/// The orbit-counting step function `N(R) = #{g : d(z, g(w)) ≤ R}`.
///
/// Stores the sorted jump radii with the function value at each jump, so it
/// is queryable at arbitrary `R`. Construction from an enumeration records
/// real counts; [`CountingFunction::from_points`] builds synthetic functions
/// (real-valued, e.g. an exact exponential) for estimator tests.
#[derive(Clone, Debug)]
pub struct CountingFunction {
    radii: Vec<f64>,
    values: Vec<f64>,
    /// Largest single-generator displacement `max_{|g|=1} d(z, g(w))`, used
    /// for the default estimation window (0 for synthetic functions).
    pub max_gen_disp: f64,
}

impl CountingFunction {
    /// Builds a counting function from explicit jump points: `values[i]` is
    /// `N(radii[i])`. Radii must be sorted strictly increasing and values
    /// nondecreasing.
    pub fn from_points(radii: Vec<f64>, values: Vec<f64>) -> Result<CountingFunction> {
        if radii.len() != values.len() || radii.is_empty() {
            return Err(Error::insufficient("counting function needs matching, nonempty radii and values"));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::insufficient("counting-function radii must be strictly increasing"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::insufficient("counting-function values must be nondecreasing"));
        }
        Ok(CountingFunction { radii, values, max_gen_disp: 0.0 })
    }

    /// `N(R)`: the value at the last jump `≤ R`, or 0 before the first jump.
    pub fn value_at(&self, r: f64) -> f64 {
        let idx = self.radii.partition_point(|&x| x <= r);
        if idx == 0 {
            0.0
        } else {
            self.values[idx - 1]
        }
    }

    /// Largest realized distance (the enumeration horizon).
    pub fn max_dist(&self) -> f64 {
        *self.radii.last().expect("nonempty by construction")
    }

    /// Default regression window: `[2·max_gen_disp, 0.8·max_dist]`. The lower
    /// edge skips the lattice-dominated core; the upper edge stays below the
    /// enumeration horizon, where truncation depletes the counts.
    pub fn default_window(&self) -> (f64, f64) {
        (2.0 * self.max_gen_disp, 0.8 * self.max_dist())
    }
}

/// Enumerates the orbit to word length `n_max` and assembles `N(R)` with one
/// jump per orbit point (identity included).
pub fn counting_function(
    gp: &GroupPresentation,
    z: &HPoint,
    w: &HPoint,
    n_max: u32,
) -> Result<CountingFunction> {
    let total = sphere_counts_by_length(gp, n_max as u64)?
        .iter()
        .sum::<u128>();
    let mut dists: Vec<f64> = Vec::with_capacity(total as usize);
    dists.push(distance(z, w)?);

    let depth = FRONTIER_DEPTH.min(n_max);
    let mut max_gen_disp = 0.0f64;
    if n_max > 0 {
        let frontier = {
            let mut split = SplitCtx {
                geom: GeomCtx::new(z, w, Mobius::identity(), |len, d| {
                    dists.push(d);
                    if len == 1 {
                        max_gen_disp = max_gen_disp.max(d);
                    }
                    Ok(())
                }),
                depth,
                frontier: Vec::new(),
            };
            rec(
                gp,
                depth,
                Tail::Root,
                RecState { len: 0, first_syllable: false },
                &DfsOpts::full(),
                &mut split,
            )?;
            split.frontier
        };

        let chunks: Vec<Result<Vec<f64>>> = frontier
            .par_iter()
            .map(|node| {
                let mut local = Vec::new();
                let point = node.matrix.apply(w)?;
                local.push(distance(z, &point)?);
                let mut geom = GeomCtx::new(z, w, node.matrix, |_len: u32, d: f64| {
                    local.push(d);
                    Ok(())
                });
                rec(
                    gp,
                    n_max,
                    node.tail,
                    RecState { len: node.len, first_syllable: node.first_syllable },
                    &DfsOpts::full(),
                    &mut geom,
                )?;
                drop(geom);
                Ok(local)
            })
            .collect();
        for c in chunks {
            dists.extend_from_slice(&c?);
        }
        if n_max == 1 {
            // frontier depth was 1, single-letter words came through tasks
            for d in dists.iter().skip(1) {
                max_gen_disp = max_gen_disp.max(*d);
            }
        }
    }

    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let values: Vec<f64> = (1..=dists.len()).map(|i| i as f64).collect();
    // Radii must be strictly increasing for queries; collapse exact ties,
    // keeping the last (largest) count at each radius.
    let mut radii = Vec::with_capacity(dists.len());
    let mut vals = Vec::with_capacity(dists.len());
    for (r, v) in dists.into_iter().zip(values) {
        if radii.last() == Some(&r) {
            *vals.last_mut().expect("nonempty") = v;
        } else {
            radii.push(r);
            vals.push(v);
        }
    }
    Ok(CountingFunction { radii, values: vals, max_gen_disp })
}

/// Least-squares estimate of the critical exponent from a counting function.
#[derive(Clone, Copy, Debug)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Regression standard error of the slope.
    pub stderr: f64,
    /// Number of regression points used.
    pub points: usize,
    pub window: (f64, f64),
}

/// Estimates `δ` as the least-squares slope of `log N(R)` against `R` over
/// `[r_min, r_max]`.
///
/// The regression grid takes the last realized jump point in each of 200
/// uniform bins across the window (so exponential-with-noise inputs are
/// weighted roughly uniformly in `R`), keeping points with `N ≥ 10`. At
/// least 10 such points are required, and `r_max` must stay at or below
/// `0.8 ·` the enumeration horizon to limit truncation bias — beyond it the
/// ball of enumerated words visibly under-counts the true orbit.
///
/// # Errors
///
/// [`Error::InsufficientData`] when the window is invalid, reaches past the
/// horizon, yields fewer than 10 usable points, or produces a nonpositive
/// slope.
pub fn delta_estimate(
    cf: &CountingFunction,
    r_min: f64,
    r_max: f64,
) -> Result<DeltaEstimate> {
    const BINS: usize = 200;
    const MIN_POINTS: usize = 10;
    const MIN_COUNT: f64 = 10.0;

    if !(r_min >= 0.0) || !(r_max > r_min) {
        return Err(Error::insufficient(format!(
            "estimation window [{r_min}, {r_max}] is empty or negative"
        )));
    }
    let horizon = 0.8 * cf.max_dist();
    if r_max > horizon * (1.0 + 1e-12) {
        return Err(Error::insufficient(format!(
            "window edge {r_max:.6} exceeds 0.8 × horizon = {horizon:.6}; truncation bias would dominate"
        )));
    }

    let width = (r_max - r_min) / BINS as f64;
    let mut xs: Vec<f64> = Vec::with_capacity(BINS);
    let mut ys: Vec<f64> = Vec::with_capacity(BINS);
    for b in 0..BINS {
        let lo = r_min + b as f64 * width;
        let hi = if b + 1 == BINS { r_max } else { lo + width };
        // Last jump radius ≤ hi that still lies in this bin.
        let idx = cf.radii.partition_point(|&x| x <= hi);
        if idx == 0 {
            continue;
        }
        let r = cf.radii[idx - 1];
        if r < lo {
            continue; // the jump belongs to an earlier bin
        }
        let n = cf.values[idx - 1];
        if n < MIN_COUNT {
            continue;
        }
        xs.push(r);
        ys.push(n.ln());
    }
    if xs.len() < MIN_POINTS {
        return Err(Error::insufficient(format!(
            "only {} usable grid points with N ≥ 10 in [{r_min}, {r_max}], need {MIN_POINTS}",
            xs.len()
        )));
    }

    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = mean_y + slope * (x - mean_x);
            (y - fit) * (y - fit)
        })
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    if slope <= 0.0 {
        return Err(Error::insufficient(format!(
            "regression slope {slope:.3e} is nonpositive; orbit growth is subexponential in the window"
        )));
    }
    Ok(DeltaEstimate { delta: slope, stderr, points: xs.len(), window: (r_min, r_max) })
}
