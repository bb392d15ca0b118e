//! The local model of `I_0 = F^*F_*O_X` at a closed point.
//!
//! Locally `I_0 = A ⊗_{A^p} A` with `A = k[[x_1, …, x_n]]`. It is a free
//! `A`-module on the monomials `α^K = α_1^{k_1} ⋯ α_n^{k_n}`, `0 ≤ k_i ≤ p-1`,
//! where `α_i = x_i ⊗ 1 - 1 ⊗ x_i` and `α_i^p = 0`. The canonical connection
//! acts on these monomials with constant integer coefficients,
//!
//! ```text
//! ∇(α^K) = - Σ_i k_i α^{K - e_i} ⊗ dx_i,
//! ```
//!
//! so every statement about the filtration and its graded pieces can be
//! checked on the `p^n`-dimensional fiber with `F_p`-linear algebra. The
//! [`bimodule`] submodule keeps the `A`-coefficients for the one argument that
//! needs them.

pub mod bimodule;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::json;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gfp::{FieldScalar, PrimeChar};
use crate::linalg::{Matrix, SubspaceBasis};
use crate::report::{Clause, VerificationReport};

pub use bimodule::{embed_generator, verify_generation, BimoduleContext, LeftPoly, TruncatedBimoduleElement};

/// Exponents `K` of an α-monomial. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(entries: Vec<u32>, p: PrimeChar) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::usage("exponent vector must have n >= 1 entries"));
        }
        if let Some(k) = entries.iter().find(|&&k| k >= p.get()) {
            return Err(Error::usage(format!("exponent {k} is not below p = {p}")));
        }
        Ok(ExponentVector(entries))
    }

    pub fn zero(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        ExponentVector(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub(crate) fn from_raw(entries: Vec<u32>) -> Self {
        ExponentVector(entries)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// The fiber of `I_0`: the `F_p`-span of all `α^K` with `K ∈ [0, p-1]^n`.
///
/// Monomials are indexed in lexicographic order, which is the base-`p`
/// reading of `K` with `k_1` the most significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct AlphaSpace {
    p: PrimeChar,
    n: usize,
}

impl AlphaSpace {
    pub fn new(p: PrimeChar, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("the number of variables n must be at least 1"));
        }
        Ok(AlphaSpace { p, n })
    }

    #[inline]
    pub fn characteristic(&self) -> PrimeChar {
        self.p
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `n (p - 1)`, the largest monomial degree.
    pub fn max_degree(&self) -> usize {
        self.n * (self.p.as_usize() - 1)
    }

    /// `p^n`. Callers are expected to have checked it against a cap.
    pub fn dim(&self) -> usize {
        self.p.as_usize().pow(self.n as u32)
    }

    pub fn index(&self, k: &ExponentVector) -> usize {
        k.0.iter().fold(0usize, |acc, &e| acc * self.p.as_usize() + e as usize)
    }

    pub fn exponent(&self, mut index: usize) -> ExponentVector {
        let p = self.p.as_usize();
        let mut v = vec![0u32; self.n];
        for slot in v.iter_mut().rev() {
            *slot = (index % p) as u32;
            index /= p;
        }
        ExponentVector(v)
    }

    /// Every exponent vector in lexicographic order.
    pub fn monomials(&self) -> impl Iterator<Item = ExponentVector> + '_ {
        (0..self.dim()).map(move |i| self.exponent(i))
    }

    fn validate(&self, k: &ExponentVector) -> Result<()> {
        if k.len() != self.n || k.0.iter().any(|&e| e >= self.p.get()) {
            return Err(Error::ContextMismatch(format!(
                "exponent vector {k} does not belong to p = {}, n = {}",
                self.p, self.n
            )));
        }
        Ok(())
    }
}

/// All `K ∈ [0, p-1]^n` with `|K| >= min_degree`, lexicographically ordered.
pub fn alpha_basis(p: PrimeChar, n: usize, min_degree: usize) -> Result<Vec<ExponentVector>> {
    let space = AlphaSpace::new(p, n)?;
    if min_degree > space.max_degree() + 1 {
        return Err(Error::usage(format!(
            "min_degree {min_degree} exceeds n(p-1)+1 = {}",
            space.max_degree() + 1
        )));
    }
    Ok(space
        .monomials()
        .filter(|k| k.degree() as usize >= min_degree)
        .collect())
}

/// A sparse `F_p`-combination of α-monomials; an element of the fiber of `I_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberVector {
    space: AlphaSpace,
    terms: BTreeMap<ExponentVector, u32>,
}

impl FiberVector {
    pub fn zero(space: AlphaSpace) -> Self {
        FiberVector {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(space: AlphaSpace, k: ExponentVector) -> Result<Self> {
        Self::from_terms(space, [(k, 1)])
    }

    pub fn from_terms<I>(space: AlphaSpace, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ExponentVector, i64)>,
    {
        let mut v = FiberVector::zero(space);
        for (k, c) in terms {
            space.validate(&k)?;
            v.add_term(k, space.p.reduce(c));
        }
        Ok(v)
    }

    pub fn from_dense(space: AlphaSpace, coords: &[u32]) -> Self {
        let mut v = FiberVector::zero(space);
        for (i, &c) in coords.iter().enumerate() {
            v.add_term(space.exponent(i), c);
        }
        v
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut out = vec![0; self.space.dim()];
        for (k, &c) in &self.terms {
            out[self.space.index(k)] = c;
        }
        out
    }

    pub fn space(&self) -> AlphaSpace {
        self.space
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, k: &ExponentVector) -> FieldScalar {
        FieldScalar::new(self.terms.get(k).copied().unwrap_or(0) as i64, self.space.p)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, FieldScalar)> {
        self.terms
            .iter()
            .map(|(k, &c)| (k, FieldScalar::new(c as i64, self.space.p)))
    }

    fn add_term(&mut self, k: ExponentVector, c: u32) {
        let p = self.space.p;
        if c.is_multiple_of(p.get()) {
            return;
        }
        match self.terms.entry(k) {
            Entry::Vacant(e) => {
                e.insert(c % p.get());
            }
            Entry::Occupied(mut e) => {
                let v = p.add(*e.get(), c);
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    fn check_same(&self, other: &FiberVector) -> Result<()> {
        if self.space != other.space {
            return Err(Error::ContextMismatch(format!(
                "fiber vectors over (p={}, n={}) and (p={}, n={})",
                self.space.p, self.space.n, other.space.p, other.space.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &FiberVector) -> Result<FiberVector> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (k, &c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FiberVector) -> Result<FiberVector> {
        self.add(&other.scale(other.space.p.neg(1)))
    }

    pub fn scale(&self, c: u32) -> FiberVector {
        let p = self.space.p;
        let mut out = FiberVector::zero(self.space);
        for (k, &v) in &self.terms {
            out.add_term(k.clone(), p.mul(v, c));
        }
        out
    }
}

impl fmt::Display for FiberVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·α^{k}")?;
        }
        Ok(())
    }
}

impl Serialize for FiberVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<_> = self.terms.iter().collect();
        terms.serialize(s)
    }
}

/// Product in the fiber algebra: `α^K α^L = α^{K+L}`, zero once any exponent reaches `p`.
pub fn algebra_multiply(u: &FiberVector, v: &FiberVector) -> Result<FiberVector> {
    u.check_same(v)?;
    let space = u.space;
    let p = space.p;
    let mut out = FiberVector::zero(space);
    for (k, &a) in &u.terms {
        for (l, &b) in &v.terms {
            let sum: Vec<u32> = k.0.iter().zip(&l.0).map(|(x, y)| x + y).collect();
            if sum.iter().any(|&e| e >= p.get()) {
                continue;
            }
            out.add_term(ExponentVector(sum), p.mul(a, b));
        }
    }
    Ok(out)
}

/// The `dx_1, …, dx_n` components of `∇v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectionOutput {
    pub components: Vec<FiberVector>,
}

impl ConnectionOutput {
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(FiberVector::is_zero)
    }
}

/// The `dx_i` component of the connection on a single vector.
pub fn derivation(v: &FiberVector, i: usize) -> FiberVector {
    let space = v.space;
    let p = space.p;
    let mut out = FiberVector::zero(space);
    for (k, &c) in &v.terms {
        let ki = k.0[i];
        if ki == 0 {
            continue;
        }
        let mut lowered = k.0.clone();
        lowered[i] -= 1;
        // coefficient -k_i
        let coeff = p.mul(c, p.neg(ki % p.get()));
        out.add_term(ExponentVector(lowered), coeff);
    }
    out
}

pub fn connection_apply(v: &FiberVector) -> ConnectionOutput {
    ConnectionOutput {
        components: (0..v.space.n).map(|i| derivation(v, i)).collect(),
    }
}

/// Matrix of the `dx_i` component map in the monomial basis.
pub fn derivation_matrix(space: AlphaSpace, i: usize) -> Matrix {
    let p = space.p;
    let dim = space.dim();
    let mut m = Matrix::zeros(p, dim, dim);
    for col in 0..dim {
        let k = space.exponent(col);
        let ki = k.0[i];
        if ki == 0 {
            continue;
        }
        let mut lowered = k.clone();
        lowered.0[i] -= 1;
        m.set(space.index(&lowered), col, p.neg(ki % p.get()));
    }
    m
}

/// The chain `V_0 ⊇ V_1 ⊇ …` obtained from an augmentation and a family of
/// derivations: `V_1 = ker(augmentation)` and
/// `V_{i+1} = { v ∈ V_i : D_j v ∈ V_i for every j }`.
///
/// Iteration stops at the zero subspace, which is included. If the chain
/// stabilises at a nonzero subspace the stable level is returned last.
pub(crate) fn kernel_filtration(augmentation: &Matrix, derivations: &[Matrix]) -> Vec<SubspaceBasis> {
    let p = augmentation.characteristic();
    let dim = augmentation.cols();
    let mut chain = vec![SubspaceBasis::full(p, dim), augmentation.kernel()];
    loop {
        let current = chain.last().expect("nonempty");
        if current.is_zero() {
            break;
        }
        // Each basis vector b_t maps to the classes of D_j b_t modulo the current level.
        let images: Vec<Vec<u32>> = current
            .rows()
            .iter()
            .map(|b| {
                derivations
                    .iter()
                    .flat_map(|d| current.reduce(&d.apply(b).expect("square derivation")))
                    .collect()
            })
            .collect();
        let relations = Matrix::from_rows(p, derivations.len() * dim, images)
            .expect("rows have equal length")
            .left_kernel();
        let next = SubspaceBasis::from_vectors(
            p,
            dim,
            relations.rows().iter().map(|c| combine(p, c, current.rows(), dim)),
        )
        .expect("combinations have ambient length");
        if &next == current {
            break;
        }
        chain.push(next);
    }
    chain
}

fn combine(p: PrimeChar, coeffs: &[u32], rows: &[Vec<u32>], dim: usize) -> Vec<u32> {
    let mut out = vec![0u32; dim];
    for (&c, row) in coeffs.iter().zip(rows) {
        if c == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(row) {
            *o = p.add(*o, p.mul(c, x));
        }
    }
    out
}

/// `v ↦ coefficient of α^0`: the augmentation `I_0 → O_X` on the fiber.
pub(crate) fn augmentation_matrix(space: AlphaSpace) -> Matrix {
    let mut m = Matrix::zeros(space.p, 1, space.dim());
    m.set(0, 0, 1);
    m
}

/// The filtration `I_0 ⊇ I_1 ⊇ …` computed from its kernel definition.
pub fn filtration_from_definition(p: PrimeChar, n: usize, caps: &Caps) -> Result<Vec<SubspaceBasis>> {
    let space = AlphaSpace::new(p, n)?;
    caps.check_fiber(1, p.get(), n)?;
    let derivations: Vec<Matrix> = (0..n).map(|i| derivation_matrix(space, i)).collect();
    Ok(kernel_filtration(&augmentation_matrix(space), &derivations))
}

/// `I_i` as the span of the monomials of degree at least `i`.
pub fn filtration_closed_form(p: PrimeChar, n: usize, i: usize) -> Result<SubspaceBasis> {
    let space = AlphaSpace::new(p, n)?;
    let dim = space.dim();
    if i > space.max_degree() {
        return Ok(SubspaceBasis::zero(p, dim));
    }
    let indices = space
        .monomials()
        .enumerate()
        .filter(|(_, k)| k.degree() as usize >= i)
        .map(|(idx, _)| idx)
        .collect::<Vec<_>>();
    Ok(SubspaceBasis::coordinate_span(p, dim, indices))
}

/// Structural checks on the connection over the whole fiber: the Leibniz
/// rule on every pair of monomials, commutation `D_i D_j = D_j D_i`,
/// `D_i^p = 0`, the graded dimension count, and `∇(I_{i+1}) ⊆ I_i ⊗ Ω¹`.
pub fn connection_report(p: PrimeChar, n: usize, caps: &Caps) -> Result<VerificationReport> {
    let space = AlphaSpace::new(p, n)?;
    caps.check_fiber(1, p.get(), n)?;
    let monomials: Vec<FiberVector> = space
        .monomials()
        .map(|k| FiberVector::monomial(space, k).expect("valid monomial"))
        .collect();
    let mut report = VerificationReport::new();

    let mut leibniz = None;
    'outer: for u in &monomials {
        let du = connection_apply(u);
        for v in &monomials {
            let dv = connection_apply(v);
            let uv = algebra_multiply(u, v)?;
            let duv = connection_apply(&uv);
            for i in 0..n {
                let rhs = algebra_multiply(u, &dv.components[i])?
                    .add(&algebra_multiply(v, &du.components[i])?)?;
                if duv.components[i] != rhs {
                    leibniz = Some(json!({
                        "u": u, "v": v, "component": i + 1,
                        "lhs": duv.components[i], "rhs": rhs,
                    }));
                    break 'outer;
                }
            }
        }
    }
    report.push(Clause::from_witness(
        "connection-leibniz",
        "∇(uv) = u∇v + v∇u on all monomial pairs, including across α_i^p = 0",
        leibniz,
    ));

    let derivations: Vec<Matrix> = (0..n).map(|i| derivation_matrix(space, i)).collect();
    let mut commute = None;
    'pairs: for i in 0..n {
        for j in (i + 1)..n {
            let a = derivations[i].mul(&derivations[j])?;
            let b = derivations[j].mul(&derivations[i])?;
            if a != b {
                commute = Some(json!({"i": i + 1, "j": j + 1, "DiDj": a, "DjDi": b}));
                break 'pairs;
            }
        }
    }
    report.push(Clause::from_witness(
        "connection-commuting",
        "D_i D_j = D_j D_i (integrable connection)",
        commute,
    ));

    let mut nilpotent = None;
    for (i, d) in derivations.iter().enumerate() {
        let mut power = Matrix::identity(p, space.dim());
        for _ in 0..p.get() {
            power = power.mul(d)?;
        }
        if !power.is_zero() {
            nilpotent = Some(json!({"i": i + 1, "D_i^p": power}));
            break;
        }
    }
    report.push(Clause::from_witness(
        "connection-p-nilpotent",
        "D_i^p = 0 (p-curvature zero on the fiber)",
        nilpotent,
    ));

    let chain: Vec<SubspaceBasis> = (0..=space.max_degree() + 1)
        .map(|i| filtration_closed_form(p, n, i))
        .collect::<Result<_>>()?;
    let mut accounting = None;
    let mut total = 0usize;
    for i in 0..=space.max_degree() {
        let graded = chain[i].dim() - chain[i + 1].dim();
        let count = space.monomials().filter(|k| k.degree() as usize == i).count();
        total += graded;
        if graded != count {
            accounting = Some(json!({"i": i, "graded_dim": graded, "monomial_count": count}));
            break;
        }
    }
    if accounting.is_none() && (total != space.dim() || chain[1].dim() != space.dim() - 1) {
        accounting = Some(json!({"total": total, "dim_I1": chain[1].dim(), "p^n": space.dim()}));
    }
    report.push(Clause::from_witness(
        "graded-dimension-count",
        "dim I_i/I_{i+1} = #{K : |K| = i}, summing to p^n; dim I_1 = p^n - 1",
        accounting,
    ));

    let mut containment = None;
    'levels: for i in 1..=space.max_degree() {
        for row in chain[i + 1].rows() {
            for (j, d) in derivations.iter().enumerate() {
                let image = d.apply(row)?;
                if !chain[i].contains(&image) {
                    containment = Some(json!({
                        "i": i, "component": j + 1,
                        "v": FiberVector::from_dense(space, row),
                        "image": FiberVector::from_dense(space, &image),
                    }));
                    break 'levels;
                }
            }
        }
    }
    report.push(Clause::from_witness(
        "connection-lowers-level",
        "∇(I_{i+1}) ⊆ I_i ⊗ Ω¹ for i >= 1",
        containment,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> PrimeChar {
        PrimeChar::new(x).unwrap()
    }

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector(v.to_vec())
    }

    fn mono(space: AlphaSpace, k: &[u32]) -> FiberVector {
        FiberVector::monomial(space, ev(k)).unwrap()
    }

    #[test]
    fn alpha_basis_examples() {
        assert_eq!(alpha_basis(p(3), 1, 1).unwrap(), vec![ev(&[1]), ev(&[2])]);
        assert_eq!(
            alpha_basis(p(2), 2, 0).unwrap(),
            vec![ev(&[0, 0]), ev(&[0, 1]), ev(&[1, 0]), ev(&[1, 1])]
        );
        assert!(alpha_basis(p(3), 2, 5).unwrap().is_empty());
        assert!(alpha_basis(p(3), 2, 6).unwrap_err().is_usage());
        assert!(alpha_basis(p(3), 0, 0).unwrap_err().is_usage());
    }

    #[test]
    fn exponent_vector_validation() {
        assert!(ExponentVector::new(vec![2, 3], p(3)).is_err());
        assert!(ExponentVector::new(vec![], p(3)).is_err());
        assert_eq!(ExponentVector::new(vec![2, 1], p(3)).unwrap().degree(), 3);
    }

    #[test]
    fn index_round_trip() {
        let space = AlphaSpace::new(p(5), 3).unwrap();
        for i in 0..space.dim() {
            assert_eq!(space.index(&space.exponent(i)), i);
        }
        let all: Vec<_> = space.monomials().collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn multiplication_examples() {
        let s1 = AlphaSpace::new(p(3), 1).unwrap();
        assert_eq!(algebra_multiply(&mono(s1, &[1]), &mono(s1, &[1])).unwrap(), mono(s1, &[2]));
        assert!(algebra_multiply(&mono(s1, &[2]), &mono(s1, &[1])).unwrap().is_zero());
        let s2 = AlphaSpace::new(p(2), 2).unwrap();
        assert_eq!(
            algebra_multiply(&mono(s2, &[1, 0]), &mono(s2, &[0, 1])).unwrap(),
            mono(s2, &[1, 1])
        );
        let other = AlphaSpace::new(p(3), 2).unwrap();
        assert!(algebra_multiply(&mono(s2, &[1, 0]), &mono(other, &[1, 0])).is_err());
    }

    #[test]
    fn connection_examples() {
        let s1 = AlphaSpace::new(p(3), 1).unwrap();
        let d = connection_apply(&mono(s1, &[1]));
        assert_eq!(d.components, vec![FiberVector::from_terms(s1, [(ev(&[0]), 2)]).unwrap()]);
        assert!(connection_apply(&mono(s1, &[0])).is_zero());

        let s2 = AlphaSpace::new(p(3), 2).unwrap();
        let d = connection_apply(&mono(s2, &[2, 1]));
        assert_eq!(d.components[0], FiberVector::from_terms(s2, [(ev(&[1, 1]), 1)]).unwrap());
        assert_eq!(d.components[1], FiberVector::from_terms(s2, [(ev(&[2, 0]), 2)]).unwrap());
    }

    #[test]
    fn derivation_matrix_matches_sparse_action() {
        let space = AlphaSpace::new(p(3), 2).unwrap();
        for i in 0..2 {
            let m = derivation_matrix(space, i);
            for k in space.monomials() {
                let v = FiberVector::monomial(space, k).unwrap();
                assert_eq!(m.apply(&v.to_dense()).unwrap(), derivation(&v, i).to_dense());
            }
        }
    }

    #[test]
    fn filtration_examples() {
        let dims = |pp, n| -> Vec<usize> {
            filtration_from_definition(p(pp), n, &Caps::default())
                .unwrap()
                .iter()
                .map(SubspaceBasis::dim)
                .collect()
        };
        assert_eq!(dims(3, 1), vec![3, 2, 1, 0]);
        assert_eq!(dims(2, 2), vec![4, 3, 1, 0]);
        assert_eq!(dims(2, 1), vec![2, 1, 0]);

        let chain = filtration_from_definition(p(3), 1, &Caps::default()).unwrap();
        assert_eq!(chain[1], SubspaceBasis::coordinate_span(p(3), 3, [1, 2]));
        assert_eq!(chain[2], SubspaceBasis::coordinate_span(p(3), 3, [2]));
    }

    #[test]
    fn closed_form_examples() {
        let i3 = filtration_closed_form(p(3), 2, 3).unwrap();
        // (1,2) -> index 5, (2,1) -> 7, (2,2) -> 8
        assert_eq!(i3, SubspaceBasis::coordinate_span(p(3), 9, [5, 7, 8]));
        assert!(filtration_closed_form(p(3), 1, 3).unwrap().is_zero());
        assert_eq!(filtration_closed_form(p(5), 2, 0).unwrap().dim(), 25);
        assert!(filtration_closed_form(p(5), 2, 100).unwrap().is_zero());
    }

    #[test]
    fn definition_matches_closed_form() {
        for (pp, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (3, 3)] {
            let chain = filtration_from_definition(p(pp), n, &Caps::default()).unwrap();
            let space = AlphaSpace::new(p(pp), n).unwrap();
            assert_eq!(chain.len(), space.max_degree() + 2, "p={pp} n={n}");
            for (i, level) in chain.iter().enumerate() {
                assert_eq!(level, &filtration_closed_form(p(pp), n, i).unwrap(), "p={pp} n={n} i={i}");
            }
        }
    }

    #[test]
    fn fiber_cap_refusal() {
        let caps = Caps {
            fiber_dim: 8,
            ..Caps::default()
        };
        assert!(filtration_from_definition(p(3), 2, &caps).unwrap_err().is_resource());
    }

    #[test]
    fn connection_report_passes() {
        for (pp, n) in [(2, 1), (2, 2), (3, 2), (5, 1), (2, 3)] {
            let report = connection_report(p(pp), n, &Caps::default()).unwrap();
            assert!(report.passed(), "p={pp} n={n}\n{report}");
        }
    }

    #[test]
    fn leibniz_boundary_case() {
        // α·α² = α³ = 0 for p = 3, and ∇ of the pieces gives -3α² ≡ 0.
        let s = AlphaSpace::new(p(3), 1).unwrap();
        let a = mono(s, &[1]);
        let b = mono(s, &[2]);
        let rhs = algebra_multiply(&a, &connection_apply(&b).components[0])
            .unwrap()
            .add(&algebra_multiply(&b, &connection_apply(&a).components[0]).unwrap())
            .unwrap();
        assert!(rhs.is_zero());
    }

    #[test]
    fn kernel_filtration_stops_when_stable() {
        // Zero derivation: every level equals V_1.
        let space = AlphaSpace::new(p(2), 1).unwrap();
        let zero = Matrix::zeros(p(2), 2, 2);
        let chain = kernel_filtration(&augmentation_matrix(space), &[zero]);
        assert_eq!(chain.len(), 2);
        assert_eq!(chain[1].dim(), 1);
    }
}
