//! Slope arithmetic for `F_*W` on a curve of genus `g`.
//!
//! A subsheaf `E ⊂ F_*W` induces on `F^*E` a filtration whose quotients have
//! ranks `r_0 >= r_1 >= ... >= r_m > 0`. The gap `μ(F_*W) - μ(E)` is bounded
//! below by `(2g-2) / (p rk E) · Σ ((p+1)/2 - i) r_{i-1}`, and the bound is
//! strict as soon as some `r_i < rk W`, by stability of `W ⊗ (Ω¹)^{⊗i}`.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gfp::{ExactRational, PrimeChar};
use crate::report::{Clause, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurveContext {
    pub g: u64,
    pub p: PrimeChar,
    pub rank_w: u64,
    pub deg_w: i64,
}

impl CurveContext {
    pub fn new(g: u64, p: PrimeChar, rank_w: u64, deg_w: i64) -> Result<Self> {
        if rank_w == 0 {
            return Err(Error::usage("rank of W must be at least 1"));
        }
        Ok(CurveContext { g, p, rank_w, deg_w })
    }

    pub fn mu_w(&self) -> ExactRational {
        ExactRational::new(self.deg_w, self.rank_w as i64).expect("rank is positive")
    }

    /// `2g - 2`.
    pub fn canonical_degree(&self) -> ExactRational {
        ExactRational::from_integer(2 * self.g as i64 - 2)
    }

    /// Stability statements are only made for `g >= 2`.
    pub fn stability_applies(&self) -> bool {
        self.g >= 2
    }
}

/// `μ(F_*W) = (μ(W) + (p-1)(g-1)) / p`.
pub fn mu_pushforward(ctx: &CurveContext) -> ExactRational {
    let p = ctx.p.get() as i64;
    let shift = ExactRational::from_integer((p - 1) * (ctx.g as i64 - 1));
    (ctx.mu_w() + shift) / ExactRational::from_integer(p)
}

/// Slope of `W ⊗ (Ω¹)^{⊗i}`, the `i`-th graded piece of `F^*F_*W`.
pub fn graded_slope(ctx: &CurveContext, i: u64) -> Result<ExactRational> {
    if i >= ctx.p.get() as u64 {
        return Err(Error::usage(format!("graded index {i} exceeds p-1 = {}", ctx.p.get() - 1)));
    }
    Ok(ctx.mu_w() + ExactRational::from_integer(i as i64) * ctx.canonical_degree())
}

/// The graded slopes increase strictly for `g >= 2`, so the filtration is the
/// Harder-Narasimhan filtration; for `g = 1` they are all equal.
pub fn hn_ordering_check(ctx: &CurveContext) -> VerificationReport {
    let slopes: Vec<ExactRational> = (0..ctx.p.get() as u64)
        .map(|i| graded_slope(ctx, i).expect("index below p"))
        .collect();
    let witness = || json!({"g": ctx.g, "slopes": slopes});
    let mut report = VerificationReport::new();
    let reference = "graded slopes μ(W) + i(2g-2) strictly increase when g >= 2";
    let clause = match ctx.g {
        0 => Clause::not_applicable("graded-slopes-ordered", reference, "g = 0"),
        1 => Clause::from_witness(
            "graded-slopes-ordered",
            reference,
            slopes.windows(2).any(|w| w[0] != w[1]).then(witness),
        )
        .with_detail("g = 1: all graded slopes equal μ(W)"),
        _ => Clause::from_witness(
            "graded-slopes-ordered",
            reference,
            slopes.windows(2).any(|w| w[0] >= w[1]).then(witness),
        ),
    };
    report.push(clause);
    report
}

/// Ranks `r_0 >= ... >= r_m >= 1` of the filtration induced on `F^*E`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct RankProfile(Vec<u64>);

impl RankProfile {
    pub fn new(ranks: Vec<u64>, p: PrimeChar) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::usage("rank profile must be non-empty"));
        }
        if ranks.contains(&0) {
            return Err(Error::usage(format!("rank profile {ranks:?} has a zero entry")));
        }
        if ranks.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::usage(format!("rank profile {ranks:?} is not non-increasing")));
        }
        if ranks.len() > p.as_usize() {
            return Err(Error::usage(format!(
                "rank profile {ranks:?} has more than p = {} parts",
                p.get()
            )));
        }
        Ok(RankProfile(ranks))
    }

    pub fn ranks(&self) -> &[u64] {
        &self.0
    }

    /// `m`, the index of the last part.
    pub fn m(&self) -> usize {
        self.0.len() - 1
    }

    /// `rk E`.
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    fn check_for(&self, p: PrimeChar) -> Result<()> {
        RankProfile::new(self.0.clone(), p).map(|_| ())
    }
}

impl std::fmt::Display for RankProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Weight `(p+1)/2 - i` of `r_{i-1}`.
fn weight(p: PrimeChar, i: usize) -> ExactRational {
    ExactRational::new(p.get() as i64 + 1 - 2 * i as i64, 2).expect("nonzero denominator")
}

/// `Σ_{i=1}^{m+1} ((p+1)/2 - i) r_{i-1}`.
pub fn weighted_sum(profile: &RankProfile, p: PrimeChar) -> Result<ExactRational> {
    profile.check_for(p)?;
    Ok(profile
        .ranks()
        .iter()
        .enumerate()
        .map(|(j, &r)| weight(p, j + 1) * ExactRational::from_integer(r as i64))
        .sum())
}

/// For odd `p` and `m > (p-1)/2`, with `h = (p-1)/2`:
/// the weighted sum equals `Σ_{i=1}^{h} i r_{h-i} - Σ_{i=1}^{m-h} i r_{h+i}`,
/// which is at least `Σ_{i=1}^{m-h} i (r_{h-i} - r_{h+i}) >= 0`.
pub fn rearrangement_identity_check(profile: &RankProfile, p: PrimeChar) -> Result<VerificationReport> {
    profile.check_for(p)?;
    let labels = [
        ("rearrangement-identity", "weighted sum = Σ i·r_{h-i} - Σ i·r_{h+i}, h = (p-1)/2"),
        ("rearrangement-lower-bound", "Σ i·r_{h-i} - Σ i·r_{h+i} >= Σ i·(r_{h-i} - r_{h+i})"),
        ("rearrangement-nonnegative", "each r_{h-i} - r_{h+i} >= 0, so the weighted sum is >= 0"),
    ];
    let mut report = VerificationReport::new();
    let skip = if p.get() == 2 {
        Some("p = 2")
    } else if profile.m() <= (p.as_usize() - 1) / 2 {
        Some("m <= (p-1)/2")
    } else {
        None
    };
    if let Some(reason) = skip {
        for (label, reference) in labels {
            report.push(Clause::not_applicable(label, reference, reason));
        }
        return Ok(report);
    }

    let r: Vec<i64> = profile.ranks().iter().map(|&x| x as i64).collect();
    let h = (p.as_usize() - 1) / 2;
    let tail = profile.m() - h;
    let lhs = weighted_sum(profile, p)?;
    let head_sum: i64 = (1..=h).map(|i| i as i64 * r[h - i]).sum();
    let tail_sum: i64 = (1..=tail).map(|i| i as i64 * r[h + i]).sum();
    let rhs = head_sum - tail_sum;
    let differences: Vec<i64> = (1..=tail).map(|i| r[h - i] - r[h + i]).collect();
    let paired: i64 = differences.iter().enumerate().map(|(i, d)| (i as i64 + 1) * d).sum();

    let values = || json!({"weighted_sum": lhs, "rearranged": rhs, "paired": paired, "differences": differences});
    report.push(Clause::from_witness(labels[0].0, labels[0].1, (lhs != rhs).then(values)));
    report.push(Clause::from_witness(labels[1].0, labels[1].1, (rhs < paired).then(values)));
    report.push(Clause::from_witness(
        labels[2].0,
        labels[2].1,
        (differences.iter().any(|&d| d < 0) || paired < 0).then(values),
    ));
    Ok(report)
}

/// All non-increasing sequences of positive integers `<= cap`, with at most `p`
/// parts, summing to `total_rank`, in lexicographic order.
pub fn enumerate_profiles(total_rank: u64, p: PrimeChar, cap: u64) -> Vec<RankProfile> {
    fn go(remaining: u64, max_part: u64, parts_left: usize, prefix: &mut Vec<u64>, out: &mut Vec<RankProfile>) {
        if remaining == 0 {
            if !prefix.is_empty() {
                out.push(RankProfile(prefix.clone()));
            }
            return;
        }
        if parts_left == 0 {
            return;
        }
        for part in 1..=max_part.min(remaining) {
            prefix.push(part);
            go(remaining - part, part, parts_left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if total_rank > 0 && cap > 0 {
        go(total_rank, cap, p.as_usize(), &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapCertificate {
    pub profile: RankProfile,
    pub weighted_sum: ExactRational,
    /// `(2g-2) / (p Σ r_i) · weighted_sum`.
    pub gap_lower_bound: ExactRational,
    /// `weighted_sum = 0`.
    pub equality_flag: bool,
    /// Some `r_i < rk W`: some quotient is a proper subsheaf of a stable
    /// bundle, so its slope is below the graded slope and the gap exceeds the bound.
    pub strict: bool,
    /// Equality is only possible here, and it forces `E = F_*W`.
    pub forces_pushforward: bool,
}

impl GapCertificate {
    /// The gap `μ(F_*W) - μ(E)` is certified positive.
    pub fn certifies_positive(&self) -> bool {
        self.gap_lower_bound.is_positive() || (self.strict && !self.gap_lower_bound.is_negative())
    }

    fn sort_key(&self) -> (&ExactRational, bool, &RankProfile) {
        (&self.gap_lower_bound, self.strict, &self.profile)
    }
}

pub fn gap_lower_bound(ctx: &CurveContext, profile: &RankProfile) -> Result<GapCertificate> {
    profile.check_for(ctx.p)?;
    if let Some(&r) = profile.ranks().iter().find(|&&r| r > ctx.rank_w) {
        return Err(Error::usage(format!(
            "profile {profile} has part {r} above rk W = {}",
            ctx.rank_w
        )));
    }
    let p = ctx.p.get() as i64;
    let weighted = weighted_sum(profile, ctx.p)?;
    let scale = ctx.canonical_degree() / ExactRational::from_integer(p * profile.total() as i64);
    let strict = profile.ranks().iter().any(|&r| r < ctx.rank_w);
    let equality_flag = weighted.is_zero();
    Ok(GapCertificate {
        gap_lower_bound: scale * weighted.clone(),
        forces_pushforward: equality_flag && !strict && profile.ranks().len() == ctx.p.as_usize(),
        profile: profile.clone(),
        weighted_sum: weighted,
        equality_flag,
        strict,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinGapReport {
    pub rank_e: u64,
    pub profiles_checked: usize,
    /// Smallest bound; ties go to non-strict certificates, then to the
    /// lexicographically smallest profile.
    pub minimum: GapCertificate,
    pub report: VerificationReport,
}

pub fn min_gap_report(ctx: &CurveContext, rank_e: u64) -> Result<MinGapReport> {
    let full = ctx.p.get() as u64 * ctx.rank_w;
    if rank_e == 0 || rank_e > full {
        return Err(Error::usage(format!("rk E = {rank_e} is outside 1..={full}")));
    }
    let certificates = enumerate_profiles(rank_e, ctx.p, ctx.rank_w)
        .par_iter()
        .map(|profile| gap_lower_bound(ctx, profile))
        .collect::<Result<Vec<_>>>()?;
    let minimum = certificates
        .iter()
        .min_by(|a, b| a.sort_key().cmp(&b.sort_key()))
        .cloned()
        .ok_or_else(|| Error::usage(format!("no admissible profile for rk E = {rank_e}")))?;

    let mut report = VerificationReport::new();
    let negative: Vec<&GapCertificate> = certificates.iter().filter(|c| c.weighted_sum.is_negative()).collect();
    report.push(Clause::from_witness(
        "weighted-sum-nonnegative",
        "Σ ((p+1)/2 - i) r_{i-1} >= 0",
        (!negative.is_empty()).then(|| json!(negative)),
    ));

    let positive_ref = "μ(F_*W) - μ(E) > 0 for every proper E ⊂ F_*W when W is stable and g >= 2";
    let equality_ref = "a zero gap forces r_0 = ... = r_{p-1} = rk W, i.e. E = F_*W";
    if ctx.stability_applies() {
        let uncertified: Vec<&GapCertificate> = certificates
            .iter()
            .filter(|c| !c.certifies_positive() && !c.forces_pushforward)
            .collect();
        report.push(Clause::from_witness(
            "gap-positive",
            positive_ref,
            (!uncertified.is_empty()).then(|| json!(uncertified)),
        ));
        let equality: Vec<&GapCertificate> = certificates.iter().filter(|c| !c.certifies_positive()).collect();
        let only_pushforward = equality.iter().all(|c| {
            c.forces_pushforward
                && rank_e == full
                && c.profile.is_constant()
                && c.profile.ranks()[0] == ctx.rank_w
        });
        report.push(Clause::from_witness(
            "gap-equality-only-at-pushforward",
            equality_ref,
            (!only_pushforward).then(|| json!(equality)),
        ));
    } else {
        report.push(Clause::not_applicable("gap-positive", positive_ref, "g < 2"));
        report.push(Clause::not_applicable("gap-equality-only-at-pushforward", equality_ref, "g < 2"));
    }
    report.extend(hn_ordering_check(ctx));
    Ok(MinGapReport {
        rank_e,
        profiles_checked: certificates.len(),
        minimum,
        report,
    })
}

/// Exhaustive checks of the weighted sum over every profile with parts `<= cap`
/// and total rank `<= p·cap`.
pub fn weighted_sum_report(p: PrimeChar, cap: u64) -> Result<VerificationReport> {
    let profiles: Vec<RankProfile> = (1..=p.get() as u64 * cap)
        .flat_map(|total| enumerate_profiles(total, p, cap))
        .collect();
    let results = profiles
        .par_iter()
        .map(|profile| Ok((profile, weighted_sum(profile, p)?, rearrangement_identity_check(profile, p)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut negative = None;
    let mut equality = None;
    let mut short = None;
    let mut identity = None;
    let mut applied = 0usize;
    for (profile, sum, rearranged) in &results {
        let full_constant = profile.ranks().len() == p.as_usize() && profile.is_constant();
        if negative.is_none() && sum.is_negative() {
            negative = Some(json!({"profile": profile, "weighted_sum": sum}));
        }
        if equality.is_none() && sum.is_zero() != full_constant {
            equality = Some(json!({"profile": profile, "weighted_sum": sum}));
        }
        // m <= (p-1)/2 - 1
        if short.is_none() && 2 * profile.m() + 3 <= p.as_usize() && !sum.is_positive() {
            short = Some(json!({"profile": profile, "weighted_sum": sum}));
        }
        if rearranged.clause("rearrangement-identity").is_some_and(|c| c.status != crate::report::Status::NotApplicable) {
            applied += 1;
        }
        if identity.is_none() && !rearranged.passed() {
            identity = Some(json!({"profile": profile, "report": rearranged.failures().collect::<Vec<_>>()}));
        }
    }

    let mut report = VerificationReport::new();
    report.push(
        Clause::from_witness("weighted-sum-nonnegative", "Σ ((p+1)/2 - i) r_{i-1} >= 0", negative)
            .with_detail(format!("{} profiles", results.len())),
    );
    report.push(Clause::from_witness(
        "weighted-sum-equality",
        "weighted sum = 0 iff m = p-1 and the profile is constant",
        equality,
    ));
    report.push(Clause::from_witness(
        "weighted-sum-short-positive",
        "weighted sum > 0 when m <= (p-1)/2 - 1",
        short,
    ));
    let identity_clause = if p.get() == 2 {
        Clause::not_applicable(
            "rearrangement-identity",
            "weighted sum = Σ i·r_{h-i} - Σ i·r_{h+i}, h = (p-1)/2",
            "p = 2",
        )
    } else {
        Clause::from_witness(
            "rearrangement-identity",
            "weighted sum = Σ i·r_{h-i} - Σ i·r_{h+i}, h = (p-1)/2",
            identity,
        )
        .with_detail(format!("applied to {applied} profiles with m > (p-1)/2"))
    };
    report.push(identity_clause);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: u64) -> PrimeChar {
        PrimeChar::new(x).unwrap()
    }

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n, d).unwrap()
    }

    fn profile(r: &[u64], pp: u64) -> RankProfile {
        RankProfile::new(r.to_vec(), p(pp)).unwrap()
    }

    #[test]
    fn pushforward_slopes() {
        assert_eq!(mu_pushforward(&CurveContext::new(2, p(2), 1, 0).unwrap()), q(1, 2));
        for pp in [2, 3, 5, 7] {
            assert_eq!(mu_pushforward(&CurveContext::new(1, p(pp), 1, 0).unwrap()), 0);
        }
        assert_eq!(mu_pushforward(&CurveContext::new(2, p(3), 1, 1).unwrap()), 1);
        assert!(CurveContext::new(2, p(3), 0, 1).unwrap_err().is_usage());
    }

    #[test]
    fn graded_slope_examples() {
        let ctx = CurveContext::new(2, p(5), 1, 0).unwrap();
        let slopes: Vec<_> = (0..5).map(|i| graded_slope(&ctx, i).unwrap()).collect();
        assert_eq!(slopes, [0, 2, 4, 6, 8].map(ExactRational::from_integer));
        let ctx = CurveContext::new(2, p(3), 2, 1).unwrap();
        let slopes: Vec<_> = (0..3).map(|i| graded_slope(&ctx, i).unwrap()).collect();
        assert_eq!(slopes, vec![q(1, 2), q(5, 2), q(9, 2)]);
        let ctx = CurveContext::new(1, p(7), 3, 2).unwrap();
        assert!((0..7).all(|i| graded_slope(&ctx, i).unwrap() == q(2, 3)));
        assert!(graded_slope(&ctx, 7).unwrap_err().is_usage());
    }

    #[test]
    fn hn_ordering() {
        for g in 1..4 {
            let report = hn_ordering_check(&CurveContext::new(g, p(5), 2, -3).unwrap());
            assert!(report.passed(), "{report}");
        }
        let report = hn_ordering_check(&CurveContext::new(0, p(5), 2, -3).unwrap());
        assert_eq!(report.clause("graded-slopes-ordered").unwrap().status, crate::report::Status::NotApplicable);
    }

    #[test]
    fn profile_validation() {
        assert!(RankProfile::new(vec![], p(3)).is_err());
        assert!(RankProfile::new(vec![1, 2], p(3)).is_err());
        assert!(RankProfile::new(vec![1, 0], p(3)).is_err());
        assert!(RankProfile::new(vec![1, 1, 1, 1], p(3)).is_err());
        assert_eq!(profile(&[2, 1, 1], 3).m(), 2);
    }

    #[test]
    fn weighted_sum_examples() {
        assert_eq!(weighted_sum(&profile(&[1, 1, 1], 3), p(3)).unwrap(), 0);
        assert_eq!(weighted_sum(&profile(&[2, 1, 1, 1, 1], 5), p(5)).unwrap(), 2);
        assert_eq!(weighted_sum(&profile(&[1], 3), p(3)).unwrap(), 1);
        assert_eq!(weighted_sum(&profile(&[1], 2), p(2)).unwrap(), q(1, 2));
        assert!(weighted_sum(&profile(&[1, 1, 1], 3), p(2)).unwrap_err().is_usage());
    }

    #[test]
    fn rearrangement_examples() {
        let status = |r: &VerificationReport| r.clause("rearrangement-identity").unwrap().status;
        let report = rearrangement_identity_check(&profile(&[3, 2, 1], 3), p(3)).unwrap();
        assert!(report.passed() && status(&report) == crate::report::Status::Pass);
        let report = rearrangement_identity_check(&profile(&[1, 1, 1, 1, 1], 5), p(5)).unwrap();
        assert!(report.passed() && status(&report) == crate::report::Status::Pass);
        let report = rearrangement_identity_check(&profile(&[3, 2, 2, 1], 5), p(5)).unwrap();
        assert!(report.passed() && status(&report) == crate::report::Status::Pass);
        assert_eq!(weighted_sum(&profile(&[3, 2, 2, 1], 5), p(5)).unwrap(), 7);
        let report = rearrangement_identity_check(&profile(&[1, 1], 2), p(2)).unwrap();
        assert_eq!(status(&report), crate::report::Status::NotApplicable);
        let report = rearrangement_identity_check(&profile(&[2, 1, 1], 5), p(5)).unwrap();
        assert_eq!(status(&report), crate::report::Status::NotApplicable);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_profiles(3, p(3), 1), vec![profile(&[1, 1, 1], 3)]);
        assert_eq!(enumerate_profiles(2, p(3), 2), vec![profile(&[1, 1], 3), profile(&[2], 3)]);
        assert!(enumerate_profiles(4, p(3), 1).is_empty());
        assert!(enumerate_profiles(0, p(3), 1).is_empty());
    }

    #[test]
    fn gap_examples() {
        let ctx = CurveContext::new(2, p(3), 1, 0).unwrap();
        let c = gap_lower_bound(&ctx, &profile(&[1], 3)).unwrap();
        assert_eq!(c.gap_lower_bound, q(2, 3));
        assert!(!c.equality_flag && c.certifies_positive());
        let c = gap_lower_bound(&ctx, &profile(&[1, 1, 1], 3)).unwrap();
        assert_eq!(c.gap_lower_bound, 0);
        assert!(c.equality_flag && !c.strict && c.forces_pushforward);
        let ctx2 = CurveContext::new(2, p(3), 2, 0).unwrap();
        let c = gap_lower_bound(&ctx2, &profile(&[2, 1], 3)).unwrap();
        assert_eq!(c.weighted_sum, 2);
        assert_eq!(c.gap_lower_bound, q(4, 9));
        assert!(gap_lower_bound(&ctx, &profile(&[2, 1], 3)).unwrap_err().is_usage());
    }

    #[test]
    fn strictness_below_rank_w() {
        // (1,1,1) under rk W = 2 has zero bound but a strict inequality
        let ctx = CurveContext::new(2, p(3), 2, 0).unwrap();
        let c = gap_lower_bound(&ctx, &profile(&[1, 1, 1], 3)).unwrap();
        assert_eq!(c.gap_lower_bound, 0);
        assert!(c.equality_flag && c.strict && !c.forces_pushforward && c.certifies_positive());
    }

    #[test]
    fn min_gap_examples() {
        let ctx = CurveContext::new(2, p(3), 1, 0).unwrap();
        let minima: Vec<_> = (1..=3)
            .map(|e| {
                let r = min_gap_report(&ctx, e).unwrap();
                assert!(r.report.passed(), "{}", r.report);
                r.minimum.gap_lower_bound
            })
            .collect();
        assert_eq!(minima, vec![q(2, 3), q(1, 3), q(0, 1)]);
        let r = min_gap_report(&ctx, 2).unwrap();
        assert_eq!(r.profiles_checked, 1);
        assert!(min_gap_report(&CurveContext::new(2, p(3), 1, 0).unwrap(), 3).unwrap().minimum.forces_pushforward);

        let r = min_gap_report(&CurveContext::new(2, p(2), 1, 0).unwrap(), 1).unwrap();
        assert_eq!(r.minimum.weighted_sum, q(1, 2));
        assert_eq!(r.minimum.gap_lower_bound, q(1, 2));

        assert!(min_gap_report(&ctx, 0).unwrap_err().is_usage());
        assert!(min_gap_report(&ctx, 4).unwrap_err().is_usage());
    }

    #[test]
    fn min_gap_p5_rank2() {
        let ctx = CurveContext::new(2, p(5), 2, 0).unwrap();
        for e in 1..=10 {
            let r = min_gap_report(&ctx, e).unwrap();
            assert!(r.report.passed(), "rkE={e}: {}", r.report);
            assert!(!r.minimum.gap_lower_bound.is_negative());
            assert_eq!(r.minimum.forces_pushforward, e == 10);
        }
        assert_eq!(min_gap_report(&ctx, 10).unwrap().minimum.profile, profile(&[2; 5], 5));
    }

    #[test]
    fn low_genus_not_applicable() {
        let r = min_gap_report(&CurveContext::new(1, p(3), 1, 0).unwrap(), 2).unwrap();
        assert_eq!(r.report.clause("gap-positive").unwrap().status, crate::report::Status::NotApplicable);
        assert!(r.report.passed());
    }

    #[test]
    fn exhaustive_grid() {
        for pp in [2, 3, 5, 7] {
            for cap in 1..=4 {
                let report = weighted_sum_report(p(pp), cap).unwrap();
                assert!(report.passed(), "p={pp} cap={cap}: {report}");
            }
        }
    }

    fn brute_force(total: u64, pp: u64, cap: u64) -> Vec<RankProfile> {
        // every sequence with entries in 1..=cap and at most p parts
        let mut out = Vec::new();
        for len in 1..=pp as u32 {
            for code in 0..cap.pow(len) {
                let seq: Vec<u64> = (0..len).map(|j| code / cap.pow(len - 1 - j) % cap + 1).collect();
                if seq.iter().sum::<u64>() == total {
                    if let Ok(pr) = RankProfile::new(seq, p(pp)) {
                        out.push(pr);
                    }
                }
            }
        }
        out.sort();
        out
    }

    proptest! {
        #[test]
        fn enumeration_matches_filtering(pi in 0usize..3, cap in 1u64..4, total in 1u64..12) {
            let pp = [2u64, 3, 5][pi];
            prop_assert_eq!(enumerate_profiles(total, p(pp), cap), brute_force(total, pp, cap));
        }

        #[test]
        fn bound_scales_with_genus(g in 2u64..10, pi in 0usize..3, cap in 1u64..4, seed in 0usize..50) {
            let pp = [2u64, 3, 5][pi];
            let profiles: Vec<_> = (1..=pp * cap).flat_map(|t| enumerate_profiles(t, p(pp), cap)).collect();
            let pr = &profiles[seed % profiles.len()];
            let c = gap_lower_bound(&CurveContext::new(g, p(pp), cap, 0).unwrap(), pr).unwrap();
            let c2 = gap_lower_bound(&CurveContext::new(2, p(pp), cap, 0).unwrap(), pr).unwrap();
            prop_assert_eq!(c.gap_lower_bound, c2.gap_lower_bound * ExactRational::from_integer(g as i64 - 1));
        }
    }
}
