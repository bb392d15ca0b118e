//! The canonical filtration of `V = F^*(F_*W)` on the fiber, for `W` of rank `r`.
//!
//! Locally `W` is trivial, so the fiber of `V` is `r` copies of the fiber of
//! `I_0` and the connection acts copy by copy. Coordinates are copy-major:
//! index `c * p^n + (monomial index)`. The levels are computed from the kernel
//! definition; they are never assumed to be monomial spans.

use serde::Serialize;
use serde_json::json;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gfp::{binomial, PrimeChar};
use crate::linalg::{Matrix, Quotient, SubspaceBasis};
use crate::local_algebra::{derivation_matrix, filtration_closed_form, kernel_filtration, AlphaSpace};
use crate::report::{Clause, VerificationReport};
use crate::tensor_rep::{dim_bounded_compositions, rep_subspace_basis, v_vector_closed};

#[derive(Debug, Clone)]
pub struct CanonicalFiltration {
    space: AlphaSpace,
    rank: usize,
    levels: Vec<SubspaceBasis>,
    derivations: Vec<Matrix>,
}

impl CanonicalFiltration {
    pub fn characteristic(&self) -> PrimeChar {
        self.space.characteristic()
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn fiber_dim(&self) -> usize {
        self.rank * self.space.dim()
    }

    /// `n (p - 1)`.
    pub fn max_degree(&self) -> usize {
        self.space.max_degree()
    }

    /// All computed levels, from `V_0` down to the zero subspace.
    pub fn levels(&self) -> &[SubspaceBasis] {
        &self.levels
    }

    /// `V_i`; zero beyond the computed chain.
    pub fn level(&self, i: usize) -> SubspaceBasis {
        self.levels
            .get(i)
            .cloned()
            .unwrap_or_else(|| SubspaceBasis::zero(self.characteristic(), self.fiber_dim()))
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(SubspaceBasis::dim).collect()
    }

    /// `dim V_i / V_{i+1}` for `i = 0 ..= n(p-1)`.
    pub fn graded_dims(&self) -> Vec<usize> {
        (0..=self.max_degree())
            .map(|i| self.level(i).dim() - self.level(i + 1).dim())
            .collect()
    }

    /// The `dx_j` component of the connection on the whole fiber.
    pub fn derivations(&self) -> &[Matrix] {
        &self.derivations
    }

    /// `gr_i = V_i / V_{i+1}` with its fixed basis.
    pub fn graded_piece(&self, i: usize) -> Quotient {
        Quotient::new(&self.level(i), &self.level(i + 1)).expect("levels are nested")
    }
}

pub fn canonical_filtration(p: PrimeChar, n: usize, r: usize, caps: &Caps) -> Result<CanonicalFiltration> {
    if r == 0 {
        return Err(Error::usage("rank r must be at least 1"));
    }
    let space = AlphaSpace::new(p, n)?;
    let fiber = caps.check_fiber(r, p.get(), n)?;
    let mut augmentation = Matrix::zeros(p, r, fiber);
    for c in 0..r {
        augmentation.set(c, c * space.dim(), 1);
    }
    let derivations: Vec<Matrix> = (0..n)
        .map(|j| derivation_matrix(space, j).identity_kron(r))
        .collect();
    let levels = kernel_filtration(&augmentation, &derivations);
    Ok(CanonicalFiltration {
        space,
        rank: r,
        levels,
        derivations,
    })
}

/// The map `gr_i → gr_{i-1} ⊗ Ω¹` induced by the connection.
#[derive(Debug, Clone, Serialize)]
pub struct GradedMap {
    pub degree: usize,
    /// Rows indexed by `(j, b)` as `j * dim gr_{i-1} + b`, columns by the basis of `gr_i`.
    pub matrix: Matrix,
    pub injective: bool,
    /// Only recorded for curves, where the map is expected to be bijective.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surjective: Option<bool>,
}

pub fn graded_map(filt: &CanonicalFiltration, i: usize) -> Result<GradedMap> {
    if i == 0 || i > filt.max_degree() {
        return Err(Error::usage(format!(
            "graded map index {i} is outside 1..={}",
            filt.max_degree()
        )));
    }
    let source = filt.graded_piece(i);
    let target = filt.graded_piece(i - 1);
    let n = filt.n();
    let columns: Vec<Vec<u32>> = (0..source.dim())
        .map(|t| {
            let mut unit = vec![0; source.dim()];
            unit[t] = 1;
            let v = source.lift(&unit);
            filt.derivations
                .iter()
                .flat_map(|d| target.coordinates(&d.apply(&v).expect("square")))
                .collect()
        })
        .collect();
    let matrix = Matrix::from_columns(filt.characteristic(), n * target.dim(), &columns)?;
    let rank = matrix.rank();
    Ok(GradedMap {
        degree: i,
        injective: rank == matrix.cols(),
        surjective: (n == 1).then_some(rank == matrix.rows()),
        matrix,
    })
}

/// `∇^ℓ : gr_ℓ → gr_0 ⊗ (Ω¹)^{⊗ℓ}` as the product of the graded maps,
/// `(Id ⊗ M_1) ⋯ (Id ⊗ M_{ℓ-1}) M_ℓ`.
///
/// Output coordinates are `(word, copy)` as `word_index * r + copy`, with the
/// first letter of the word recording the first derivative taken.
pub fn nabla_power_matrix(filt: &CanonicalFiltration, degree: usize) -> Result<Matrix> {
    let p = filt.characteristic();
    if degree > filt.max_degree() {
        return Err(Error::usage(format!(
            "tensor degree {degree} exceeds n(p-1) = {}",
            filt.max_degree()
        )));
    }
    if degree == 0 {
        return Ok(Matrix::identity(p, filt.graded_piece(0).dim()));
    }
    let n = filt.n();
    let mut acc = graded_map(filt, degree)?.matrix;
    for (applied, i) in (1..degree).rev().enumerate() {
        let copies = n.pow(applied as u32 + 1);
        acc = graded_map(filt, i)?.matrix.identity_kron(copies).mul(&acc)?;
    }
    Ok(acc)
}

/// The same map computed without the graded maps: apply the raw derivations
/// `ℓ` times to a representative and read off the `gr_0` coordinates at the end.
pub fn nabla_power_direct(filt: &CanonicalFiltration, degree: usize) -> Result<Matrix> {
    let p = filt.characteristic();
    if degree > filt.max_degree() {
        return Err(Error::usage(format!(
            "tensor degree {degree} exceeds n(p-1) = {}",
            filt.max_degree()
        )));
    }
    let source = filt.graded_piece(degree);
    let bottom = filt.graded_piece(0);
    let r = bottom.dim();
    let words = filt.n().pow(degree as u32);
    let columns: Vec<Vec<u32>> = (0..source.dim())
        .map(|t| {
            let mut unit = vec![0; source.dim()];
            unit[t] = 1;
            // states[w] = D_{w_ℓ} ⋯ D_{w_1} v, word-major
            let mut states = vec![source.lift(&unit)];
            for _ in 0..degree {
                states = states
                    .iter()
                    .flat_map(|s| filt.derivations.iter().map(move |d| d.apply(s).expect("square")))
                    .collect();
            }
            debug_assert_eq!(states.len(), words);
            states.iter().flat_map(|s| bottom.coordinates(s)).collect()
        })
        .collect();
    Matrix::from_columns(p, words * r, &columns)
}

/// Image of `∇^ℓ` on `gr_ℓ` for `W = O_X`, inside `(Ω¹)^{⊗ℓ}`.
pub fn nabla_power_image(p: PrimeChar, n: usize, degree: usize, caps: &Caps) -> Result<SubspaceBasis> {
    caps.check_tensor(n, degree)?;
    let filt = canonical_filtration(p, n, 1, caps)?;
    Ok(nabla_power_matrix(&filt, degree)?.image())
}

/// `W ⊗ V^[ℓ]` in the `(word, copy)` coordinates used by [`nabla_power_matrix`].
fn rep_tensor_w(p: PrimeChar, n: usize, degree: usize, r: usize, caps: &Caps) -> Result<SubspaceBasis> {
    let rep = rep_subspace_basis(p, n, degree, caps)?;
    let ambient = rep.ambient_dim() * r;
    let vectors = rep.rows().iter().flat_map(|row| {
        (0..r).map(move |c| {
            let mut v = vec![0; ambient];
            for (w, &x) in row.iter().enumerate() {
                v[w * r + c] = x;
            }
            v
        })
    });
    SubspaceBasis::from_vectors(p, ambient, vectors)
}

fn level_dims_witness(filt: &CanonicalFiltration) -> serde_json::Value {
    json!({"level_dims": filt.dims()})
}

/// Every property of the canonical filtration on the fiber, for `W` of rank `r`:
/// its length, the closed form, graded dimensions, the connection lowering
/// levels, graded injectivity, the image of `∇^ℓ`, and the `Sym` comparison.
pub fn canonical_filtration_report(p: PrimeChar, n: usize, r: usize, caps: &Caps) -> Result<VerificationReport> {
    let space = AlphaSpace::new(p, n)?;
    let top = space.max_degree();
    caps.check_fiber(r, p.get(), n)?;
    caps.check_tensor(n, top)?;
    let filt = canonical_filtration(p, n, r, caps)?;
    let mut report = VerificationReport::new();

    // (a) length
    let length_ok = filt.level(top + 1).is_zero() && !filt.level(top).is_zero() && filt.levels().len() == top + 2;
    report.push(Clause::from_witness(
        "filtration-length",
        "V_{n(p-1)+1} = 0 and V_{n(p-1)} != 0",
        (!length_ok).then(|| level_dims_witness(&filt)),
    ));

    let mut closed = None;
    for i in 0..=top + 1 {
        let expected = filtration_closed_form(p, n, i)?.direct_sum_power(r);
        if filt.level(i) != expected {
            closed = Some(json!({"i": i, "kernel_defined": filt.level(i), "closed_form": expected}));
            break;
        }
    }
    report.push(Clause::from_witness(
        "filtration-closed-form",
        "V_i = I_i^{⊕r} with I_i spanned by α^K, |K| >= i",
        closed,
    ));

    let graded = filt.graded_dims();
    let expected_graded = (0..=top)
        .map(|i| dim_bounded_compositions(p, n, i).map(|d| d as usize * r))
        .collect::<Result<Vec<_>>>()?;
    let palindromic = graded.iter().eq(graded.iter().rev());
    let total: usize = graded.iter().sum();
    report.push(Clause::from_witness(
        "graded-dimensions",
        "dim V_i/V_{i+1} = r·#{K : |K| = i}; palindromic; total r·p^n; V_0/V_1 ≅ W",
        (graded != expected_graded || !palindromic || total != filt.fiber_dim() || graded[0] != r)
            .then(|| json!({"graded": graded, "expected": expected_graded})),
    ));

    // (b) ∇(V_{i+1}) ⊆ V_i ⊗ Ω¹
    let mut lowering = None;
    'levels: for i in 1..=top {
        let (upper, lower) = (filt.level(i), filt.level(i + 1));
        for v in lower.rows() {
            for (j, d) in filt.derivations().iter().enumerate() {
                let image = d.apply(v)?;
                if !upper.contains(&image) {
                    lowering = Some(json!({"i": i, "component": j + 1, "v": v, "image": image}));
                    break 'levels;
                }
            }
        }
    }
    report.push(Clause::from_witness(
        "nabla-lowers-level",
        "∇(V_{i+1}) ⊆ V_i ⊗ Ω¹ for i >= 1",
        lowering,
    ));

    // (c) graded injectivity; bijectivity for curves
    let maps = (1..=top).map(|i| graded_map(&filt, i)).collect::<Result<Vec<_>>>()?;
    report.push(Clause::from_witness(
        "graded-injective",
        "gr_i → gr_{i-1} ⊗ Ω¹ is injective for 1 <= i <= n(p-1)",
        maps.iter().find(|m| !m.injective).map(|m| json!({"i": m.degree, "matrix": m.matrix})),
    ));
    if n == 1 {
        report.push(Clause::from_witness(
            "graded-bijective-curve",
            "on curves gr_i → gr_{i-1} ⊗ Ω¹ is an isomorphism for 1 <= i <= p-1",
            maps.iter()
                .find(|m| m.surjective != Some(true) || !m.injective)
                .map(|m| json!({"i": m.degree, "matrix": m.matrix})),
        ));
    } else {
        report.push(Clause::not_applicable(
            "graded-bijective-curve",
            "on curves gr_i → gr_{i-1} ⊗ Ω¹ is an isomorphism for 1 <= i <= p-1",
            "n > 1",
        ));
    }

    // (d) image of ∇^ℓ, composition consistency and sign law
    let mut composition = None;
    let mut image = None;
    let mut sign = None;
    for (degree, &graded_dim) in graded.iter().enumerate() {
        let product = nabla_power_matrix(&filt, degree)?;
        let direct = nabla_power_direct(&filt, degree)?;
        if composition.is_none() && product != direct {
            composition = Some(json!({"l": degree, "product": product, "direct": direct}));
        }
        let got = direct.image();
        let expected = rep_tensor_w(p, n, degree, r, caps)?;
        if image.is_none() && (got != expected || got.dim() != graded_dim) {
            image = Some(json!({
                "l": degree, "image_dim": got.dim(), "expected_dim": expected.dim(),
                "image": got, "expected": expected,
            }));
        }
        if sign.is_none() {
            sign = sign_law_witness(&filt, &direct, degree, caps)?;
        }
    }
    report.push(Clause::from_witness(
        "nabla-power-composition",
        "∇^l on gr_l equals the composite of the graded maps",
        composition,
    ));
    report.push(Clause::from_witness(
        "nabla-power-image",
        "∇^l : V_l/V_{l+1} ≅ W ⊗ (Ω¹)^[l] for 0 <= l <= n(p-1)",
        image,
    ));
    report.push(Clause::from_witness(
        "nabla-power-sign",
        "∇^l(α^K) = (-1)^l Σ_σ (dx_1^{⊗k_1} ⊗ ⋯ ⊗ dx_n^{⊗k_n})·σ",
        sign,
    ));

    // (e) Sym comparison below p
    let mut sym = None;
    for (degree, &graded_dim) in graded.iter().enumerate().take(p.as_usize()).skip(1) {
        let sym_dim = binomial((n + degree - 1) as u64, degree as u64)? as usize * r;
        if graded_dim != sym_dim {
            sym = Some(json!({"l": degree, "graded_dim": graded_dim, "r_dim_sym": sym_dim}));
            break;
        }
    }
    report.push(Clause::from_witness(
        "graded-sym-below-p",
        "V_l/V_{l+1} ≅ W ⊗ Sym^l(Ω¹) for l < p",
        sym,
    ));
    Ok(report)
}

/// Column of `∇^ℓ` at `α^K` (first copy of `W`) must be `(-1)^ℓ v(K)`.
fn sign_law_witness(
    filt: &CanonicalFiltration,
    direct: &Matrix,
    degree: usize,
    caps: &Caps,
) -> Result<Option<serde_json::Value>> {
    let p = filt.characteristic();
    let r = filt.rank();
    let piece = filt.graded_piece(degree);
    let sign = if degree.is_multiple_of(2) { 1 } else { p.neg(1) };
    for (t, &col) in piece.basis_columns().iter().enumerate() {
        if col >= filt.space.dim() {
            break; // later copies repeat the first
        }
        let k = filt.space.exponent(col);
        let expected = v_vector_closed(p, k.entries(), caps)?.scale(sign).to_dense();
        let got: Vec<u32> = (0..expected.len()).map(|w| direct.get(w * r, t)).collect();
        if got != expected {
            return Ok(Some(json!({"K": k, "nabla_power": got, "expected": expected})));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> PrimeChar {
        PrimeChar::new(x).unwrap()
    }

    fn filt(pp: u64, n: usize, r: usize) -> CanonicalFiltration {
        canonical_filtration(p(pp), n, r, &Caps::default()).unwrap()
    }

    #[test]
    fn filtration_dimensions() {
        assert_eq!(filt(3, 1, 2).dims(), vec![6, 4, 2, 0]);
        assert_eq!(filt(2, 2, 1).dims(), vec![4, 3, 1, 0]);
        assert_eq!(filt(2, 1, 1).dims(), vec![2, 1, 0]);
        assert!(canonical_filtration(p(2), 1, 0, &Caps::default()).unwrap_err().is_usage());
    }

    #[test]
    fn rank_r_is_direct_sum() {
        for (pp, n, r) in [(3u64, 1, 2), (2, 2, 3), (3, 2, 2)] {
            let f = filt(pp, n, r);
            let base = filt(pp, n, 1);
            for i in 0..f.levels().len() {
                assert_eq!(f.level(i), base.level(i).direct_sum_power(r));
            }
        }
    }

    #[test]
    fn curve_graded_maps() {
        let f = filt(3, 1, 1);
        let m1 = graded_map(&f, 1).unwrap();
        assert_eq!(m1.matrix.to_rows(), vec![vec![2]]);
        assert!(m1.injective && m1.surjective == Some(true));
        let m2 = graded_map(&f, 2).unwrap();
        // α² ↦ -2α = α (mod 3)
        assert_eq!(m2.matrix.to_rows(), vec![vec![1]]);
        assert!(m2.injective && m2.surjective == Some(true));
        assert!(graded_map(&f, 0).unwrap_err().is_usage());
        assert!(graded_map(&f, 3).unwrap_err().is_usage());
    }

    #[test]
    fn surface_top_graded_map() {
        let f = filt(2, 2, 1);
        let m = graded_map(&f, 2).unwrap();
        // gr_2 = <α₁α₂>, gr_1 = <α₂, α₁>; ∇(α₁α₂) = -α₂ dx₁ - α₁ dx₂
        assert_eq!(m.matrix.to_rows(), vec![vec![1], vec![0], vec![0], vec![1]]);
        assert!(m.injective);
        assert_eq!(m.surjective, None);
        assert!(m.matrix.rank() < m.matrix.rows());
    }

    #[test]
    fn nabla_power_examples() {
        let caps = Caps::default();
        assert_eq!(
            nabla_power_image(p(3), 2, 2, &caps).unwrap(),
            rep_subspace_basis(p(3), 2, 2, &caps).unwrap()
        );
        assert_eq!(nabla_power_image(p(3), 2, 2, &caps).unwrap().dim(), 3);
        assert_eq!(nabla_power_image(p(5), 2, 0, &caps).unwrap(), SubspaceBasis::full(p(5), 1));
        // p = 2, n = 2, ℓ = 2: e1⊗e2 + e2⊗e1
        let img = nabla_power_image(p(2), 2, 2, &caps).unwrap();
        assert_eq!(img.rows(), &[vec![0, 1, 1, 0]]);
    }

    #[test]
    fn product_equals_direct() {
        for (pp, n, r) in [(3u64, 1, 1), (2, 2, 2), (3, 2, 1), (2, 3, 1)] {
            let f = filt(pp, n, r);
            for l in 0..=f.max_degree() {
                assert_eq!(
                    nabla_power_matrix(&f, l).unwrap(),
                    nabla_power_direct(&f, l).unwrap(),
                    "p={pp} n={n} r={r} l={l}"
                );
            }
        }
    }

    #[test]
    fn report_examples() {
        let caps = Caps::default();
        let r = canonical_filtration_report(p(3), 1, 1, &caps).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(filt(3, 1, 1).graded_dims(), vec![1, 1, 1]);

        let r = canonical_filtration_report(p(2), 3, 1, &caps).unwrap();
        assert!(r.passed(), "{r}");
        let f = filt(2, 3, 1);
        assert!(f.level(4).is_zero() && !f.level(3).is_zero());

        let r = canonical_filtration_report(p(3), 2, 2, &caps).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(filt(3, 2, 2).graded_dims(), vec![2, 4, 6, 4, 2]);
    }

    #[test]
    fn report_refuses_large_tensor_degree() {
        let err = canonical_filtration_report(p(7), 3, 1, &Caps::default()).unwrap_err();
        assert!(err.is_resource());
    }
}
