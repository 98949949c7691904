//! Free-product presentations, normal forms, and exact word counts.
//!
//! An essentially free, zonal group is presented as a free product of
//! *factors*: parabolic factors isomorphic to `Z^r` (given by `r` commuting
//! parabolic generators sharing a boundary fixed point) and loxodromic cyclic
//! factors `Z`. The generating set is the presented generators and their
//! inverses; the word metric `|g|` counts letters from that set.
//!
//! Because the product is free, every non-identity element factors uniquely
//! as a sequence of *syllables* — maximal runs from a single factor — with
//! adjacent syllables from distinct factors. A syllable of a parabolic factor
//! is recorded as its exponent vector in `Z^r` (commutativity is folded into
//! the vector), so `|g|` is the sum of ℓ1 norms of the exponent vectors. This
//! normal form is what makes exhaustive orbit enumeration exact: no element
//! is ever visited twice.
//!
//! Counting is exact in `u128` with explicit overflow reporting. The sphere
//! count of a rank-`r` factor — the number of nonzero `v ∈ Z^r` with
//! `|v|₁ = k` — has the closed form
//!
//! ```text
//! Σ_{j=1}^{min(r,k)} 2^j · C(r,j) · C(k−1, j−1),
//! ```
//!
//! (choose the `j` nonzero coordinates, their signs, and a composition of `k`
//! into `j` parts), which grows like `k^{r−1}`. Whole-group sphere counts
//! follow from a dynamic program over (length, last factor).

use num_complex::Complex64;

use crate::hyperbolic::{IsometryClass, Mobius, Model};
use crate::{Error, Result};

/// Entrywise tolerance for the structural matrix checks (commutation,
/// fixed-point membership) performed by [`GroupPresentation::validate`].
pub const STRUCTURE_TOL: f64 = 1e-9;

/// A point of the boundary at infinity: `R ∪ {∞}` for H2, `C ∪ {∞}` for H3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    Finite(Complex64),
    Infinity,
}

impl BoundaryPoint {
    /// Whether the Möbius map fixes this boundary point within `tol`.
    ///
    /// For finite `p` the fixed-point equation `c p² + (d − a) p − b = 0` is
    /// tested; for `∞`, the condition is `c = 0`.
    pub fn fixed_by(&self, m: &Mobius, tol: f64) -> bool {
        match *self {
            BoundaryPoint::Infinity => m.c.norm() <= tol,
            BoundaryPoint::Finite(p) => {
                (m.c * p * p + (m.d - m.a) * p - m.b).norm() <= tol
            }
        }
    }
}

/// One free factor of the presentation.
#[derive(Clone, Debug)]
pub enum Factor {
    /// `Z^r` generated by `r` commuting parabolic maps with a common fixed
    /// point (`r = generators.len() ≥ 1`).
    Parabolic { generators: Vec<Mobius>, fixed_point: BoundaryPoint },
    /// Infinite cyclic factor generated by a loxodromic map.
    Loxodromic { generator: Mobius },
}

impl Factor {
    /// Rank of the factor as a free-abelian group (1 for loxodromic).
    pub fn rank(&self) -> usize {
        match self {
            Factor::Parabolic { generators, .. } => generators.len(),
            Factor::Loxodromic { .. } => 1,
        }
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(self, Factor::Parabolic { .. })
    }

    /// Generator `j` of the factor (0-based; loxodromic factors have one).
    pub fn generator(&self, j: usize) -> &Mobius {
        match self {
            Factor::Parabolic { generators, .. } => &generators[j],
            Factor::Loxodromic { generator } => {
                assert_eq!(j, 0, "loxodromic factors have a single generator");
                generator
            }
        }
    }
}

/// A free product of factors, at least one of them parabolic (zonal).
///
/// Discreteness and freeness are trusted input: the structural checks of
/// [`GroupPresentation::validate`] verify isometry types, commutation, and
/// fixed points, but whether the factors actually generate a discrete free
/// product (a ping-pong/Poincaré-polyhedron condition) is the caller's
/// responsibility and is documented, not tested.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub model: Model,
    pub factors: Vec<Factor>,
}

impl GroupPresentation {
    /// Maximal parabolic rank `r_max` (0 if no parabolic factor — such a
    /// presentation is rejected by [`validate`](Self::validate)).
    pub fn r_max(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| f.is_parabolic())
            .map(Factor::rank)
            .max()
            .unwrap_or(0)
    }

    /// Total number of generators counted once each (not with inverses).
    pub fn generator_count(&self) -> usize {
        self.factors.iter().map(Factor::rank).sum()
    }

    /// Indices of factors whose parabolic rank equals `r_max`.
    pub fn max_rank_parabolic_factors(&self) -> Vec<usize> {
        let r = self.r_max();
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_parabolic() && f.rank() == r)
            .map(|(i, _)| i)
            .collect()
    }

    /// Structural diagnostics. An empty report means the presentation is
    /// accepted. Never errors: all findings are reported together.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        if self.factors.is_empty() {
            v.push("presentation has no factors".to_string());
        }
        if !self.factors.iter().any(Factor::is_parabolic) {
            v.push("zonal violation: no parabolic factor (group has no cusps)".to_string());
        }
        for (i, f) in self.factors.iter().enumerate() {
            match f {
                Factor::Parabolic { generators, fixed_point } => {
                    if generators.is_empty() {
                        v.push(format!("factor {i}: parabolic factor with rank 0"));
                    }
                    if self.model == Model::H2 && generators.len() > 1 {
                        v.push(format!(
                            "factor {i}: rank {} parabolic factor in H2 (H2 cusps have rank 1)",
                            generators.len()
                        ));
                    }
                    for (j, g) in generators.iter().enumerate() {
                        let class = g.classify();
                        if class != IsometryClass::Parabolic {
                            v.push(format!(
                                "factor {i}: generator {j} classifies as {class}, expected parabolic"
                            ));
                        }
                        if !fixed_point.fixed_by(g, STRUCTURE_TOL) {
                            v.push(format!(
                                "factor {i}: generator {j} does not fix the declared fixed point"
                            ));
                        }
                    }
                    for j in 0..generators.len() {
                        for k in (j + 1)..generators.len() {
                            let gh = generators[j].compose(&generators[k]);
                            let hg = generators[k].compose(&generators[j]);
                            if !gh.approx_eq(&hg, STRUCTURE_TOL) {
                                v.push(format!(
                                    "factor {i}: generators {j} and {k} do not commute"
                                ));
                            }
                        }
                    }
                }
                Factor::Loxodromic { generator } => {
                    let class = generator.classify();
                    if class != IsometryClass::Loxodromic {
                        v.push(format!(
                            "factor {i}: generator classifies as {class}, expected loxodromic"
                        ));
                    }
                }
            }
            if self.model == Model::H2 {
                for j in 0..f.rank() {
                    let g = f.generator(j);
                    let im = g.a.im.abs() + g.b.im.abs() + g.c.im.abs() + g.d.im.abs();
                    if im > STRUCTURE_TOL {
                        v.push(format!(
                            "factor {i}: generator {j} has complex entries in the H2 model"
                        ));
                    }
                }
            }
        }
        ValidationReport { violations: v }
    }
}

/// Outcome of [`GroupPresentation::validate`]: named violations, or empty.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            return f.write_str("presentation accepted");
        }
        for (i, violation) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{violation}")?;
        }
        Ok(())
    }
}

/// A maximal run of letters from one factor: the factor index and the
/// exponent vector in `Z^rank` (length 1 for loxodromic factors), not all
/// zero. The syllable's contribution to word length is `|exponents|₁`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub factor: usize,
    pub exponents: Vec<i64>,
}

impl Syllable {
    pub fn new(factor: usize, exponents: Vec<i64>) -> Syllable {
        Syllable { factor, exponents }
    }

    /// ℓ1 norm of the exponent vector.
    pub fn l1(&self) -> u64 {
        self.exponents.iter().map(|e| e.unsigned_abs()).sum()
    }
}

/// A group element in free-product normal form: syllables with distinct
/// adjacent factor indices. The empty word is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NormalWord {
    pub syllables: Vec<Syllable>,
}

impl NormalWord {
    pub fn identity() -> NormalWord {
        NormalWord { syllables: Vec::new() }
    }

    pub fn new(syllables: Vec<Syllable>) -> NormalWord {
        NormalWord { syllables }
    }

    /// Verifies normal form against a presentation: valid factor indices,
    /// exponent vectors of the right rank, no zero syllables, distinct
    /// adjacent factors.
    pub fn check_normal(&self, gp: &GroupPresentation) -> Result<()> {
        let mut last: Option<usize> = None;
        for (pos, s) in self.syllables.iter().enumerate() {
            if s.factor >= gp.factors.len() {
                return Err(Error::non_normal(format!(
                    "syllable {pos} names factor {} of {}",
                    s.factor,
                    gp.factors.len()
                )));
            }
            if s.exponents.len() != gp.factors[s.factor].rank() {
                return Err(Error::non_normal(format!(
                    "syllable {pos} has {} exponents for a rank-{} factor",
                    s.exponents.len(),
                    gp.factors[s.factor].rank()
                )));
            }
            if s.l1() == 0 {
                return Err(Error::non_normal(format!("syllable {pos} is trivial")));
            }
            if last == Some(s.factor) {
                return Err(Error::non_normal(format!(
                    "syllables {} and {pos} share factor {}",
                    pos - 1,
                    s.factor
                )));
            }
            last = Some(s.factor);
        }
        Ok(())
    }

    /// Word metric: sum of the syllables' ℓ1 norms; 0 for the identity.
    pub fn word_length(&self) -> u64 {
        self.syllables.iter().map(Syllable::l1).sum()
    }

    /// Syllable-wise inverse: reversed order, negated exponents. The result
    /// is again normal, of equal length (the generating set is symmetric).
    pub fn inverse(&self) -> NormalWord {
        NormalWord {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable {
                    factor: s.factor,
                    exponents: s.exponents.iter().map(|e| -e).collect(),
                })
                .collect(),
        }
    }
}

fn checked_add(a: u128, b: u128, n: u64) -> Result<u128> {
    a.checked_add(b).ok_or(Error::CountOverflow { n: n as u32 })
}

fn checked_mul(a: u128, b: u128, n: u64) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::CountOverflow { n: n as u32 })
}

/// Number of nonzero integer vectors in `Z^r` with ℓ1 norm exactly `k`:
/// the sphere count of one rank-`r` factor.
///
/// Exact in `u128`; overflow is reported, never wrapped.
///
/// # Examples
///
/// ```
/// use zonal::presentation::sphere_count_factor;
///
/// assert_eq!(sphere_count_factor(1, 5)?, 2);      // ±5
/// assert_eq!(sphere_count_factor(2, 2)?, 8);      // (±2,0),(0,±2),(±1,±1)
/// # Ok::<(), zonal::Error>(())
/// ```
pub fn sphere_count_factor(r: usize, k: u64) -> Result<u128> {
    assert!(r >= 1, "factor rank must be at least 1");
    assert!(k >= 1, "sphere radius must be at least 1");
    let mut total: u128 = 0;
    for j in 1..=r.min(k as usize) {
        // 2^j · C(r, j) · C(k−1, j−1)
        let mut term: u128 = 1u128 << j;
        term = checked_mul(term, binomial(r as u64, j as u64, k)?, k)?;
        term = checked_mul(term, binomial(k - 1, (j - 1) as u64, k)?, k)?;
        total = checked_add(total, term, k)?;
    }
    Ok(total)
}

/// Binomial coefficient in u128 with overflow reporting (`n` only names the
/// length in the error).
fn binomial(n: u64, k: u64, err_n: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = checked_mul(acc, (n - i) as u128, err_n)?;
        acc /= (i + 1) as u128; // exact: product of j consecutive integers is divisible by j!
    }
    Ok(acc)
}

/// Exact number of group elements with `|g| = n`.
///
/// Dynamic program over (length, last factor): a word of length `n` ending
/// in a factor-`f` syllable of ℓ1 norm `k` continues a word of length
/// `n − k` ending in any other factor (or the identity).
pub fn sphere_count_group(gp: &GroupPresentation, n: u64) -> Result<u128> {
    Ok(*sphere_counts_by_length(gp, n)?.last().expect("n+1 entries"))
}

/// Exact per-length counts `|{g : |g| = m}|` for `m = 0..=n` (index = length).
pub fn sphere_counts_by_length(gp: &GroupPresentation, n: u64) -> Result<Vec<u128>> {
    let nf = gp.factors.len();
    let n = n as usize;
    // ways[f][k] = sphere count of factor f at ℓ1 norm k
    let mut ways = vec![vec![0u128; n + 1]; nf];
    for (f, factor) in gp.factors.iter().enumerate() {
        for k in 1..=n {
            ways[f][k] = sphere_count_factor(factor.rank(), k as u64)?;
        }
    }
    // ending[m][f] = words of length m whose last syllable uses factor f
    let mut ending = vec![vec![0u128; nf]; n + 1];
    let mut totals = Vec::with_capacity(n + 1);
    totals.push(1u128); // the identity
    for m in 1..=n {
        for f in 0..nf {
            let mut acc = 0u128;
            for k in 1..=m {
                if ways[f][k] == 0 {
                    continue;
                }
                let mut rest = 0u128;
                if m == k {
                    rest = 1; // the syllable starts the word
                }
                for f2 in 0..nf {
                    if f2 != f {
                        rest = checked_add(rest, ending[m - k][f2], m as u64)?;
                    }
                }
                acc = checked_add(acc, checked_mul(ways[f][k], rest, m as u64)?, m as u64)?;
            }
            ending[m][f] = acc;
        }
        let mut t = 0u128;
        for f in 0..nf {
            t = checked_add(t, ending[m][f], m as u64)?;
        }
        totals.push(t);
    }
    Ok(totals)
}

/// Matrix of a normal word: the ordered product of generator powers,
/// `matrix(s₁)·matrix(s₂)·⋯`, identity for the empty word.
///
/// # Errors
///
/// [`Error::NonNormal`] when the word fails [`NormalWord::check_normal`].
pub fn matrix_of(w: &NormalWord, gp: &GroupPresentation) -> Result<Mobius> {
    w.check_normal(gp)?;
    let mut acc = Mobius::identity();
    for s in &w.syllables {
        let factor = &gp.factors[s.factor];
        for (j, &e) in s.exponents.iter().enumerate() {
            if e != 0 {
                acc = acc.compose(&factor.generator(j).pow(e));
            }
        }
    }
    Ok(acc)
}

/// The groups shipped with the crate, used throughout the tests and the
/// guide. Each is a ping-pong free product; the JSON configurations under
/// `configs/` mirror these constructors exactly.
pub mod examples {
    use super::*;

    /// Two rank-1 parabolic factors `⟨z ↦ z+2⟩ ∗ ⟨z ↦ z/(2z+1)⟩`, fixing ∞
    /// and 0 — the classical finite-covolume boundary-regime group with
    /// `δ = 1` (a congruence-type subgroup of the modular group). Isometric
    /// circles of `z/(2z+1)` have radius 1/2 around ∓1/2, disjoint from the
    /// fundamental strip |Re z| ≥ 1 of the translation, so the product is
    /// free by ping-pong.
    pub fn gamma2() -> GroupPresentation {
        let t = Mobius::from_real(1.0, 2.0, 0.0, 1.0).expect("unit parabolic");
        let l = Mobius::from_real(1.0, 0.0, 2.0, 1.0).expect("unit parabolic");
        GroupPresentation {
            model: Model::H2,
            factors: vec![
                Factor::Parabolic {
                    generators: vec![t],
                    fixed_point: BoundaryPoint::Infinity,
                },
                Factor::Parabolic {
                    generators: vec![l],
                    fixed_point: BoundaryPoint::Finite(Complex64::new(0.0, 0.0)),
                },
            ],
        }
    }

    /// Parabolic ∗ loxodromic Schottky-type family: `⟨z ↦ z+t⟩` and the
    /// loxodromic map with axis (−1, 1) and translation length `l`,
    /// `[[cosh(l/2), sinh(l/2)], [sinh(l/2), cosh(l/2)]]`.
    ///
    /// For `t` large enough compared to the isometric circles of the
    /// loxodromic map (radius `1/sinh(l/2)` around `±coth(l/2)`), ping-pong
    /// applies and the product is free with `δ < 1` (infinite covolume,
    /// polynomial regime).
    pub fn schottky(t: f64, l: f64) -> GroupPresentation {
        let half = l / 2.0;
        let lox = Mobius::from_real(half.cosh(), half.sinh(), half.sinh(), half.cosh())
            .expect("unit loxodromic");
        GroupPresentation {
            model: Model::H2,
            factors: vec![
                Factor::Parabolic {
                    generators: vec![Mobius::translation(Complex64::new(t, 0.0))],
                    fixed_point: BoundaryPoint::Infinity,
                },
                Factor::Loxodromic { generator: lox },
            ],
        }
    }

    /// The shipped Schottky parameters `t = 4.4`, `l = 2`.
    ///
    /// Chosen dense: ping-pong needs `coth(l/4) ≤ t/2`, and here the margin
    /// is under 2% (2.164 vs 2.2), which pushes the exponent of convergence
    /// up to δ ≈ 0.81. That keeps `2δ − 1 ≈ 0.6` comfortably away from zero,
    /// so the polynomial regime of the orbital sums is visible at small
    /// word lengths. A sparser choice like `t = 6, l = 3` has δ barely
    /// above 1/2 and its `P_n` looks flat over any feasible range of `n`.
    pub fn schottky_default() -> GroupPresentation {
        schottky(4.4, 2.0)
    }

    /// H3 group with one rank-2 cusp: `⟨z ↦ z+4, z ↦ z+4i⟩ ∗ ⟨loxodromic⟩`
    /// (`r_max = 2`). The loxodromic factor is the axis-(−1,1) map with
    /// translation length 3; the horoball at ∞ preserved by the rank-2
    /// lattice is far from its isometric spheres, giving ping-pong.
    pub fn rank2_cusp() -> GroupPresentation {
        let p1 = Mobius::translation(Complex64::new(4.0, 0.0));
        let p2 = Mobius::translation(Complex64::new(0.0, 4.0));
        let half: f64 = 1.5;
        let lox = Mobius::from_real(half.cosh(), half.sinh(), half.sinh(), half.cosh())
            .expect("unit loxodromic");
        GroupPresentation {
            model: Model::H3,
            factors: vec![
                Factor::Parabolic {
                    generators: vec![p1, p2],
                    fixed_point: BoundaryPoint::Infinity,
                },
                Factor::Loxodromic { generator: lox },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_sphere_counts() {
        assert_eq!(sphere_count_factor(1, 5).unwrap(), 2);
        assert_eq!(sphere_count_factor(2, 2).unwrap(), 8);
        assert_eq!(sphere_count_factor(2, 10).unwrap(), 40);
        assert_eq!(sphere_count_factor(1, 1).unwrap(), 2);
        assert_eq!(sphere_count_factor(3, 1).unwrap(), 6);
    }

    #[test]
    fn group_sphere_counts_small() {
        let gp = examples::gamma2();
        let counts = sphere_counts_by_length(&gp, 2).unwrap();
        assert_eq!(counts, vec![1, 4, 12]);
        assert_eq!(sphere_count_group(&gp, 0).unwrap(), 1);
    }

    #[test]
    fn word_length_examples() {
        assert_eq!(NormalWord::identity().word_length(), 0);
        let w = NormalWord::new(vec![Syllable::new(0, vec![3, -2])]);
        assert_eq!(w.word_length(), 5);
        let w2 = NormalWord::new(vec![
            Syllable::new(0, vec![2]),
            Syllable::new(1, vec![-4]),
        ]);
        assert_eq!(w2.word_length(), 6);
    }

    #[test]
    fn matrix_of_translation_powers() {
        let gp = examples::gamma2();
        let w = NormalWord::new(vec![Syllable::new(0, vec![3])]);
        let m = matrix_of(&w, &gp).unwrap();
        assert!(m.approx_eq(&Mobius::from_real(1.0, 6.0, 0.0, 1.0).unwrap(), 1e-12));
        assert!(matrix_of(&NormalWord::identity(), &gp)
            .unwrap()
            .approx_eq(&Mobius::identity(), 0.0));
    }

    #[test]
    fn adjacent_same_factor_rejected() {
        let gp = examples::gamma2();
        let w = NormalWord::new(vec![
            Syllable::new(0, vec![1]),
            Syllable::new(0, vec![-1]),
        ]);
        assert!(matches!(matrix_of(&w, &gp), Err(Error::NonNormal { .. })));
    }

    #[test]
    fn inverse_is_normal_same_length() {
        let gp = examples::rank2_cusp();
        let w = NormalWord::new(vec![
            Syllable::new(0, vec![2, -1]),
            Syllable::new(1, vec![3]),
            Syllable::new(0, vec![0, 1]),
        ]);
        let inv = w.inverse();
        inv.check_normal(&gp).unwrap();
        assert_eq!(inv.word_length(), w.word_length());
        // g · g⁻¹ = identity as matrices
        let m = matrix_of(&w, &gp).unwrap().compose(&matrix_of(&inv, &gp).unwrap());
        assert!(m.approx_eq(&Mobius::identity(), 1e-9));
    }

    #[test]
    fn validation_accepts_shipped_groups() {
        assert!(examples::gamma2().validate().is_ok());
        assert!(examples::schottky_default().validate().is_ok());
        assert!(examples::rank2_cusp().validate().is_ok());
    }

    #[test]
    fn validation_names_violations() {
        // Loxodromic matrix in a parabolic slot.
        let bad = GroupPresentation {
            model: Model::H2,
            factors: vec![Factor::Parabolic {
                generators: vec![Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap()],
                fixed_point: BoundaryPoint::Infinity,
            }],
        };
        let report = bad.validate();
        assert!(!report.is_ok());
        assert!(report.violations.iter().any(|v| v.contains("expected parabolic")));

        // No parabolic factor at all.
        let lox_only = GroupPresentation {
            model: Model::H2,
            factors: vec![Factor::Loxodromic {
                generator: Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap(),
            }],
        };
        assert!(lox_only
            .validate()
            .violations
            .iter()
            .any(|v| v.contains("zonal violation")));
    }

    #[test]
    fn validation_checks_fixed_point() {
        let wrong_fp = GroupPresentation {
            model: Model::H2,
            factors: vec![Factor::Parabolic {
                generators: vec![Mobius::from_real(1.0, 2.0, 0.0, 1.0).unwrap()],
                fixed_point: BoundaryPoint::Finite(Complex64::new(0.0, 0.0)),
            }],
        };
        assert!(wrong_fp
            .validate()
            .violations
            .iter()
            .any(|v| v.contains("fixed point")));
    }
}
