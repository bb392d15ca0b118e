//! The subrepresentation `V^[ℓ] ⊂ V^{⊗ℓ}` of `GL(V)` spanned by full
//! symmetrisations
//!
//! ```text
//! v(k_1, …, k_n) = Σ_{σ ∈ S_ℓ} (e_1^{⊗k_1} ⊗ ⋯ ⊗ e_n^{⊗k_n}) · σ.
//! ```
//!
//! Every word with letter content `K` occurs in the sum exactly
//! `k_1! ⋯ k_n!` times, so over `F_p` the vector vanishes as soon as some
//! `k_i ≥ p`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gfp::{binomial, factorial_mod_p, PrimeChar};
use crate::linalg::{Matrix, SubspaceBasis};
use crate::report::{Clause, VerificationReport};

/// A basis word `e_{w_1} ⊗ ⋯ ⊗ e_{w_ℓ}` with letters in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct TensorWord(Vec<u32>);

impl TensorWord {
    pub fn new(letters: Vec<u32>, n: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l as usize > n) {
            return Err(Error::usage(format!("letter {bad} is outside 1..={n}")));
        }
        Ok(TensorWord(letters))
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// How many times each letter occurs.
    pub fn content(&self, n: usize) -> Vec<u32> {
        let mut c = vec![0; n];
        for &l in &self.0 {
            c[l as usize - 1] += 1;
        }
        c
    }
}

impl fmt::Display for TensorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "⊗")?;
            }
            write!(f, "e{l}")?;
        }
        Ok(())
    }
}

/// `V^{⊗ℓ}` for `dim V = n`, with words indexed lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TensorSpace {
    p: PrimeChar,
    n: usize,
    degree: usize,
}

impl TensorSpace {
    pub fn new(p: PrimeChar, n: usize, degree: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("dim V must be at least 1"));
        }
        Ok(TensorSpace { p, n, degree })
    }

    pub fn characteristic(&self) -> PrimeChar {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `n^ℓ`; callers check it against the tensor cap first.
    pub fn dim(&self) -> usize {
        self.n.pow(self.degree as u32)
    }

    pub fn index(&self, w: &TensorWord) -> usize {
        w.0.iter().fold(0, |acc, &l| acc * self.n + (l as usize - 1))
    }

    pub fn word(&self, mut index: usize) -> TensorWord {
        let mut letters = vec![0u32; self.degree];
        for slot in letters.iter_mut().rev() {
            *slot = (index % self.n) as u32 + 1;
            index /= self.n;
        }
        TensorWord(letters)
    }
}

/// A sparse element of `V^{⊗ℓ}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorVector {
    space: TensorSpace,
    terms: BTreeMap<TensorWord, u32>,
}

impl TensorVector {
    pub fn zero(space: TensorSpace) -> Self {
        TensorVector {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_dense(space: TensorSpace, coords: &[u32]) -> Self {
        let mut v = TensorVector::zero(space);
        for (i, &c) in coords.iter().enumerate() {
            v.add_term(space.word(i), c);
        }
        v
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut out = vec![0; self.space.dim()];
        for (w, &c) in &self.terms {
            out[self.space.index(w)] = c;
        }
        out
    }

    pub fn space(&self) -> TensorSpace {
        self.space
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &TensorWord) -> u32 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> &BTreeMap<TensorWord, u32> {
        &self.terms
    }

    pub fn scale(&self, c: u32) -> TensorVector {
        let mut out = TensorVector::zero(self.space);
        for (w, &v) in &self.terms {
            out.add_term(w.clone(), self.space.p.mul(v, c));
        }
        out
    }

    fn add_term(&mut self, w: TensorWord, c: u32) {
        let p = self.space.p;
        let c = c % p.get();
        if c == 0 {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
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
}

impl Serialize for TensorVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<_> = self.terms.iter().collect();
        terms.serialize(s)
    }
}

impl fmt::Display for TensorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{w}")?;
        }
        Ok(())
    }
}

fn base_word(k: &[u32]) -> Vec<u32> {
    k.iter()
        .enumerate()
        .flat_map(|(i, &ki)| std::iter::repeat_n(i as u32 + 1, ki as usize))
        .collect()
}

/// Calls `f` on every permutation of `0..len` (Heap's algorithm).
fn for_each_permutation(len: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..len).collect();
    let mut c = vec![0usize; len];
    f(&perm);
    let mut i = 0;
    while i < len {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `v(K)` as the literal sum over all `ℓ!` permutations of positions.
///
/// `K` is any vector of nonnegative integers; entries at or above `p` are
/// allowed and give zero.
pub fn v_vector_naive(p: PrimeChar, k: &[u32], caps: &Caps) -> Result<TensorVector> {
    let degree = k.iter().sum::<u32>() as usize;
    caps.check_naive(degree)?;
    let space = TensorSpace::new(p, k.len(), degree)?;
    let base = base_word(k);
    let mut out = TensorVector::zero(space);
    for_each_permutation(degree, |sigma| {
        let w: Vec<u32> = sigma.iter().map(|&s| base[s]).collect();
        out.add_term(TensorWord(w), 1);
    });
    Ok(out)
}

/// Distinct words with the given letter content, lexicographically.
pub fn words_with_content(k: &[u32]) -> Vec<TensorWord> {
    fn go(remaining: &mut [u32], prefix: &mut Vec<u32>, out: &mut Vec<TensorWord>) {
        if remaining.iter().all(|&r| r == 0) {
            out.push(TensorWord(prefix.clone()));
            return;
        }
        for i in 0..remaining.len() {
            if remaining[i] == 0 {
                continue;
            }
            remaining[i] -= 1;
            prefix.push(i as u32 + 1);
            go(remaining, prefix, out);
            prefix.pop();
            remaining[i] += 1;
        }
    }
    let mut out = Vec::new();
    go(&mut k.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// `v(K) = (k_1! ⋯ k_n!) · Σ_{content(w) = K} w`.
pub fn v_vector_closed(p: PrimeChar, k: &[u32], caps: &Caps) -> Result<TensorVector> {
    let degree = k.iter().sum::<u32>() as usize;
    caps.check_tensor(k.len(), degree)?;
    let space = TensorSpace::new(p, k.len(), degree)?;
    let multiplicity = k
        .iter()
        .fold(1 % p.get(), |acc, &ki| p.mul(acc, factorial_mod_p(ki as u64, p).value()));
    let mut out = TensorVector::zero(space);
    if multiplicity == 0 {
        return Ok(out);
    }
    for w in words_with_content(k) {
        out.add_term(w, multiplicity);
    }
    Ok(out)
}

/// `K ∈ [0, bound-1]^n` with `|K| = total`, lexicographically.
pub fn bounded_compositions(n: usize, total: usize, bound: u32) -> Vec<Vec<u32>> {
    fn go(n: usize, total: usize, bound: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let slots_left = (n - prefix.len() - 1) as u64;
        for k in 0..bound.min(total as u32 + 1) {
            let rest = total - k as usize;
            if rest as u64 > slots_left * (bound as u64 - 1) {
                continue;
            }
            prefix.push(k);
            go(n, rest, bound, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if bound > 0 {
        go(n, total, bound, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// `#{K ∈ [0, p-1]^n : |K| = ℓ}` by inclusion–exclusion,
/// `Σ_j (-1)^j C(n, j) C(ℓ - jp + n - 1, n - 1)`.
pub fn dim_bounded_compositions(p: PrimeChar, n: usize, degree: usize) -> Result<u128> {
    if n == 0 {
        return Err(Error::usage("dim V must be at least 1"));
    }
    let p = p.as_usize();
    let mut total: i128 = 0;
    for j in 0..=n {
        let Some(rest) = degree.checked_sub(j * p) else {
            break;
        };
        let term = binomial(n as u64, j as u64)?
            .checked_mul(binomial((rest + n - 1) as u64, (n - 1) as u64)?)
            .ok_or(Error::Overflow("bounded composition count"))?;
        let term = i128::try_from(term).map_err(|_| Error::Overflow("bounded composition count"))?;
        total = if j % 2 == 0 {
            total.checked_add(term)
        } else {
            total.checked_sub(term)
        }
        .ok_or(Error::Overflow("bounded composition count"))?;
    }
    Ok(total as u128)
}

/// The spanning vectors `v(K)`, `K ∈ [0, p-1]^n`, `|K| = ℓ`, with their `K`.
pub fn rep_spanning_set(p: PrimeChar, n: usize, degree: usize, caps: &Caps) -> Result<Vec<(Vec<u32>, TensorVector)>> {
    caps.check_tensor(n, degree)?;
    bounded_compositions(n, degree, p.get())
        .into_iter()
        .map(|k| v_vector_closed(p, &k, caps).map(|v| (k, v)))
        .collect()
}

/// Reduced basis of `V^[ℓ]` inside `V^{⊗ℓ}`.
pub fn rep_subspace_basis(p: PrimeChar, n: usize, degree: usize, caps: &Caps) -> Result<SubspaceBasis> {
    let space = TensorSpace::new(p, n, degree)?;
    let spanning = rep_spanning_set(p, n, degree, caps)?;
    SubspaceBasis::from_vectors(p, space.dim(), spanning.into_iter().map(|(_, v)| v.to_dense()))
}

/// `(g ⊗ ⋯ ⊗ g) v` for a dense tensor `v ∈ V^{⊗ℓ}`.
pub fn apply_diagonal(g: &Matrix, v: &[u32], degree: usize) -> Vec<u32> {
    let p = g.characteristic();
    let n = g.rows();
    let mut cur = v.to_vec();
    for axis in 0..degree {
        let stride = n.pow((degree - 1 - axis) as u32);
        let mut next = vec![0u32; cur.len()];
        for base in (0..cur.len()).filter(|&i| (i / stride).is_multiple_of(n)) {
            for a in 0..n {
                let mut acc = 0u32;
                for b in 0..n {
                    acc = p.add(acc, p.mul(g.get(a, b), cur[base + b * stride]));
                }
                next[base + a * stride] = acc;
            }
        }
        cur = next;
    }
    cur
}

/// A uniformly random invertible matrix, by rejection.
pub fn random_invertible<R: Rng>(p: PrimeChar, n: usize, rng: &mut R) -> Matrix {
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..p.get())).collect())
            .collect();
        let m = Matrix::from_rows(p, n, rows).expect("square");
        if m.rank() == n {
            return m;
        }
    }
}

/// Per-grid-point seed so that each `(p, n, ℓ)` gets its own reproducible stream.
fn derive_seed(seed: u64, p: PrimeChar, n: usize, degree: usize) -> u64 {
    let mut x = seed;
    for v in [p.get() as u64, n as u64, degree as u64] {
        x = x.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(v);
        x ^= x >> 29;
    }
    x
}

fn equivariance_witness(g: &Matrix, basis: &SubspaceBasis, degree: usize) -> Option<serde_json::Value> {
    basis.rows().iter().find_map(|row| {
        let image = apply_diagonal(g, row, degree);
        (!basis.contains(&image)).then(|| json!({"g": g, "basis_vector": row, "image": image}))
    })
}

/// Checks that `V^[ℓ]` is stable under the diagonal action of `GL_n(F_p)`:
/// the identity, the swap of `e_1` and `e_2`, and `samples` seeded random
/// invertible matrices.
pub fn gl_equivariance_check(
    p: PrimeChar,
    n: usize,
    degree: usize,
    samples: usize,
    seed: u64,
    caps: &Caps,
) -> Result<VerificationReport> {
    let basis = rep_subspace_basis(p, n, degree, caps)?;
    let reference = "V^[l] is a sub-representation of GL(V)";
    let mut report = VerificationReport::new();

    let identity = Matrix::identity(p, n);
    report.push(Clause::from_witness(
        "gl-identity",
        reference,
        equivariance_witness(&identity, &basis, degree),
    ));

    if n >= 2 {
        let mut swap = Matrix::identity(p, n);
        swap.set(0, 0, 0);
        swap.set(1, 1, 0);
        swap.set(0, 1, 1);
        swap.set(1, 0, 1);
        report.push(Clause::from_witness(
            "gl-coordinate-swap",
            reference,
            equivariance_witness(&swap, &basis, degree),
        ));
    } else {
        report.push(Clause::not_applicable("gl-coordinate-swap", reference, "n = 1"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, p, n, degree));
    let matrices: Vec<Matrix> = (0..samples).map(|_| random_invertible(p, n, &mut rng)).collect();
    let witness = matrices
        .par_iter()
        .enumerate()
        .map(|(i, g)| equivariance_witness(g, &basis, degree).map(|w| json!({"sample": i, "failure": w})))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();
    report.push(
        Clause::from_witness("gl-random-samples", reference, witness)
            .with_detail(format!("{samples} samples, seed {seed}")),
    );
    Ok(report)
}

/// Index of each composition of `ℓ` into `n` parts (unbounded), lexicographically.
fn sym_index(n: usize, degree: usize) -> BTreeMap<Vec<u32>, usize> {
    bounded_compositions(n, degree, degree as u32 + 1)
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect()
}

/// The content-quotient map `V^{⊗ℓ} → Sym^ℓ V` applied to a dense tensor.
pub fn content_quotient(p: PrimeChar, n: usize, degree: usize, v: &[u32]) -> Result<Vec<u32>> {
    let space = TensorSpace::new(p, n, degree)?;
    let index = sym_index(n, degree);
    let mut out = vec![0u32; index.len()];
    for (i, &c) in v.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let slot = index[&space.word(i).content(n)];
        out[slot] = p.add(out[slot], c);
    }
    Ok(out)
}

/// For `0 < ℓ < p`: `dim V^[ℓ] = C(n+ℓ-1, ℓ)` and the content quotient
/// `V^{⊗ℓ} → Sym^ℓ V` is injective on `V^[ℓ]`.
pub fn sym_compare(p: PrimeChar, n: usize, degree: usize, caps: &Caps) -> Result<VerificationReport> {
    if degree == 0 || degree >= p.as_usize() {
        return Err(Error::usage(format!(
            "Sym comparison needs 0 < l < p, got l = {degree}, p = {p}"
        )));
    }
    let basis = rep_subspace_basis(p, n, degree, caps)?;
    let count = dim_bounded_compositions(p, n, degree)?;
    let sym_dim = binomial((n + degree - 1) as u64, degree as u64)?;
    let mut report = VerificationReport::new();

    report.push(Clause::from_witness(
        "rep-spanning-set-independent",
        "the v(K) with 0 <= k_i <= p-1 are linearly independent",
        (basis.dim() as u128 != count).then(|| json!({"rank": basis.dim(), "spanning_vectors": count})),
    ));
    report.push(Clause::from_witness(
        "sym-dimension",
        "V^[l] ≅ Sym^l(V) for 0 < l < p",
        (basis.dim() as u128 != sym_dim).then(|| json!({"dim_rep": basis.dim(), "dim_sym": sym_dim})),
    ));
    let images = basis
        .rows()
        .iter()
        .map(|r| content_quotient(p, n, degree, r))
        .collect::<Result<Vec<_>>>()?;
    let cols = images.first().map_or(0, Vec::len);
    let rank = Matrix::from_rows(p, cols, images)?.rank();
    report.push(Clause::from_witness(
        "sym-quotient-injective",
        "V^[l] ≅ Sym^l(V) for 0 < l < p",
        (rank != basis.dim()).then(|| json!({"rank_of_image": rank, "dim_rep": basis.dim()})),
    ));
    Ok(report)
}
