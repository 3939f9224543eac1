//! Distance profiles `n -> d(C_{g,n})` and the cumulative score
//! `S_g(M) = sum_{n=p+1}^{M} d(C_{g,n})`.
//!
//! The profile is non-increasing in `n`, so once two lengths share a distance
//! every length between them does too. The builder evaluates interval
//! endpoints and bisects only intervals whose endpoints differ.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceEngine;
use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;

/// Distance of the first bisection pivot from `p + 1`.
pub const PIVOT_OFFSET: usize = 64;

/// A maximal run of lengths sharing one minimum distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub n_lo: usize,
    pub n_hi: usize,
    pub d: u32,
}

impl Run {
    pub fn len(&self) -> usize {
        self.n_hi - self.n_lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.n_hi < self.n_lo
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub poly: Gf2Poly,
    pub degree: u32,
    pub order: u64,
    /// Requested maximum length `M`.
    pub target: usize,
    pub runs: Vec<Run>,
    /// Transform evaluations spent building this profile.
    #[serde(skip)]
    pub evaluations: usize,
}

/// `S_g(M)`, or `Inapplicable` when the order of `g` is below `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Score {
    Value(u64),
    Inapplicable,
}

impl Score {
    pub fn value(self) -> Option<u64> {
        match self {
            Score::Value(v) => Some(v),
            Score::Inapplicable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub poly: Gf2Poly,
    pub degree: u32,
    pub order: u64,
    /// `M -> S_g(M)`; `None` where the order is below `M`.
    pub scores: BTreeMap<usize, Option<u64>>,
}

impl DistanceProfile {
    /// Last length covered by the profile: `min(M, n_c)`.
    pub fn covered_until(&self) -> usize {
        self.runs.last().map_or(self.degree as usize, |r| r.n_hi)
    }

    pub fn distance_at(&self, n: usize) -> Option<u32> {
        let idx = self.runs.partition_point(|r| r.n_hi < n);
        self.runs.get(idx).filter(|r| r.n_lo <= n).map(|r| r.d)
    }

    pub fn score(&self, m: usize) -> Result<Score> {
        let p = self.degree as usize;
        if m < p + 1 {
            return Err(Error::InvalidLength(format!("M = {m} is below p + 1 = {}", p + 1)));
        }
        if m > self.target {
            return Err(Error::InvalidLength(format!(
                "M = {m} exceeds the profile's built range {}",
                self.target
            )));
        }
        if self.order < m as u64 {
            return Ok(Score::Inapplicable);
        }
        let total = self
            .runs
            .iter()
            .take_while(|r| r.n_lo <= m)
            .map(|r| (r.n_hi.min(m) - r.n_lo + 1) as u64 * r.d as u64)
            .sum();
        Ok(Score::Value(total))
    }

    pub fn score_result(&self, targets: &[usize]) -> Result<ScoreResult> {
        let mut scores = BTreeMap::new();
        for &m in targets {
            scores.insert(m, self.score(m)?.value());
        }
        Ok(ScoreResult {
            poly: self.poly,
            degree: self.degree,
            order: self.order,
            scores,
        })
    }

    /// Same profile viewed through `g`'s reciprocal, or clipped to a
    /// smaller target.
    fn relabel(&self, poly: Gf2Poly, target: usize) -> DistanceProfile {
        let limit = target.min(self.order.min(usize::MAX as u64) as usize);
        let runs = self
            .runs
            .iter()
            .filter(|r| r.n_lo <= limit)
            .map(|r| Run {
                n_hi: r.n_hi.min(limit),
                ..*r
            })
            .collect();
        DistanceProfile {
            poly,
            target,
            runs,
            ..self.clone()
        }
    }

    /// CSV rows `poly_hex,n_lo,n_hi,d` with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("poly_hex,n_lo,n_hi,d\n");
        for r in &self.runs {
            let _ = writeln!(out, "{},{},{},{}", self.poly, r.n_lo, r.n_hi, r.d);
        }
        out
    }
}

/// Incremental binary-split construction of a profile. Exposes score bounds
/// for the partially resolved state so callers can abandon hopeless builds.
pub struct ProfileBuilder<'e> {
    engine: &'e mut DistanceEngine,
    poly: Gf2Poly,
    order: u64,
    target: usize,
    limit: usize,
    known: BTreeMap<usize, u32>,
    pending: Vec<(usize, usize)>,
    evaluations_at_start: usize,
}

impl<'e> ProfileBuilder<'e> {
    /// Seeds the build with `p + 1`, the pivot near `p + 1`, `min(M, n_c)`
    /// and any `extra_anchors` inside that range.
    pub fn new(
        engine: &'e mut DistanceEngine,
        order: u64,
        target: usize,
        extra_anchors: &[usize],
    ) -> Result<Self> {
        let poly = engine.generator();
        let first = poly.degree() as usize + 1;
        if target < first {
            return Err(Error::InvalidLength(format!(
                "M = {target} is below p + 1 = {first}"
            )));
        }
        let limit = (target as u64).min(order) as usize;
        let evaluations_at_start = engine.evaluations();
        let mut builder = ProfileBuilder {
            engine,
            poly,
            order,
            target,
            limit,
            known: BTreeMap::new(),
            pending: Vec::new(),
            evaluations_at_start,
        };
        if limit < first {
            // order below p + 1: nothing usable
            return Ok(builder);
        }
        builder.engine.reserve_length(limit);
        builder.known.insert(first, poly.weight());
        let pivot = (first - 1 + PIVOT_OFFSET).min(limit);
        let mut anchors = vec![limit, pivot];
        anchors.extend(extra_anchors.iter().copied().filter(|&a| a > first && a <= limit));
        anchors.sort_unstable();
        anchors.dedup();
        for a in anchors {
            if a > first {
                let d = builder.engine.min_distance(a)?;
                builder.known.insert(a, d);
            }
        }
        let points: Vec<usize> = builder.known.keys().copied().collect();
        for pair in points.windows(2).rev() {
            builder.push_interval(pair[0], pair[1]);
        }
        Ok(builder)
    }

    fn push_interval(&mut self, lo: usize, hi: usize) {
        if hi > lo + 1 && self.known[&lo] != self.known[&hi] {
            self.pending.push((lo, hi));
        }
    }

    pub fn generator(&self) -> Gf2Poly {
        self.poly
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn is_done(&self) -> bool {
        self.pending.is_empty()
    }

    /// Resolves one pending interval by evaluating its midpoint. Returns
    /// `false` when nothing is left to resolve.
    pub fn step(&mut self) -> Result<bool> {
        let Some((lo, hi)) = self.pending.pop() else {
            return Ok(false);
        };
        let mid = lo + (hi - lo) / 2;
        let d = self.engine.min_distance(mid)?;
        let (d_lo, d_hi) = (self.known[&lo], self.known[&hi]);
        if d > d_lo || d < d_hi {
            return Err(Error::Internal(format!(
                "{}: d({mid}) = {d} breaks monotonicity between d({lo}) = {d_lo} and d({hi}) = {d_hi}",
                self.poly
            )));
        }
        self.known.insert(mid, d);
        self.push_interval(mid, hi);
        self.push_interval(lo, mid);
        Ok(true)
    }

    /// Drops everything above `limit`, which must already be a known point.
    pub fn truncate(&mut self, limit: usize) -> Result<()> {
        if limit >= self.limit {
            return Ok(());
        }
        if !self.known.contains_key(&limit) {
            return Err(Error::Internal(format!("truncation point {limit} is not resolved")));
        }
        self.known.split_off(&(limit + 1));
        self.pending.retain(|&(_, hi)| hi <= limit);
        self.limit = limit;
        self.target = limit;
        Ok(())
    }

    /// Bounds `(lower, upper)` on `S_g(M)` implied by the resolved points.
    pub fn score_bounds(&self, m: usize) -> (u64, u64) {
        let mut lower = 0u64;
        let mut upper = 0u64;
        let mut prev: Option<(usize, u32)> = None;
        for (&n, &d) in self.known.range(..=m) {
            lower += d as u64;
            upper += d as u64;
            if let Some((a, d_a)) = prev {
                let interior = (n - a - 1) as u64;
                lower += interior * d as u64;
                upper += interior * d_a as u64;
            }
            prev = Some((n, d));
        }
        if let Some((a, d_a)) = prev {
            if let Some((&b, &d_b)) = self.known.range(m + 1..).next() {
                let interior = (m.min(b - 1) - a) as u64;
                lower += interior * d_b as u64;
                upper += interior * d_a as u64;
            }
        }
        (lower, upper)
    }

    pub fn run_to_completion(mut self) -> Result<DistanceProfile> {
        while self.step()? {}
        self.finish()
    }

    pub fn finish(self) -> Result<DistanceProfile> {
        if !self.pending.is_empty() {
            return Err(Error::Internal("profile finished with unresolved intervals".into()));
        }
        let mut runs: Vec<Run> = Vec::new();
        for (&n, &d) in &self.known {
            match runs.last_mut() {
                Some(run) if run.d == d => run.n_hi = n,
                Some(run) => {
                    // equal-endpoint gaps extend the previous run
                    run.n_hi = n - 1;
                    runs.push(Run { n_lo: n, n_hi: n, d });
                }
                None => runs.push(Run { n_lo: n, n_hi: n, d }),
            }
        }
        Ok(DistanceProfile {
            poly: self.poly,
            degree: self.poly.degree(),
            order: self.order,
            target: self.target,
            runs,
            evaluations: self.engine.evaluations() - self.evaluations_at_start,
        })
    }
}

/// Exact profile of `g` over `[p + 1, min(M, n_c)]`.
pub fn build_profile(g: Gf2Poly, m: usize) -> Result<DistanceProfile> {
    let order = g.order()?;
    let mut engine = DistanceEngine::new(g)?;
    ProfileBuilder::new(&mut engine, order, m, &[])?.run_to_completion()
}

pub fn score(profile: &DistanceProfile, m: usize) -> Result<Score> {
    profile.score(m)
}

/// Scores `g` at every target from a single profile built to the largest
/// applicable target.
pub fn score_targets(g: Gf2Poly, targets: &[usize]) -> Result<ScoreResult> {
    let Some(&largest) = targets.iter().max() else {
        return Err(Error::InvalidConfig("no target lengths given".into()));
    };
    build_profile(g, largest)?.score_result(targets)
}

/// Profiles keyed by canonical polynomial. A cached build to a larger `M`
/// answers every smaller request.
#[derive(Default)]
pub struct ProfileCache {
    profiles: Mutex<HashMap<Gf2Poly, DistanceProfile>>,
}

impl ProfileCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, g: Gf2Poly, m: usize) -> Result<DistanceProfile> {
        let key = g.canonical();
        if let Some(hit) = self.lookup(key, m) {
            return Ok(hit.relabel(g, m));
        }
        let built = build_profile(key, m)?;
        let out = built.relabel(g, m);
        let mut map = self.profiles.lock().unwrap();
        match map.get(&key) {
            Some(existing) if existing.target >= m => {}
            _ => {
                map.insert(key, built);
            }
        }
        Ok(out)
    }

    fn lookup(&self, key: Gf2Poly, m: usize) -> Option<DistanceProfile> {
        let map = self.profiles.lock().unwrap();
        map.get(&key)
            .filter(|p| p.target >= m || p.order <= p.target as u64)
            .cloned()
    }

    pub fn score_targets(&self, g: Gf2Poly, targets: &[usize]) -> Result<ScoreResult> {
        let Some(&largest) = targets.iter().max() else {
            return Err(Error::InvalidConfig("no target lengths given".into()));
        };
        self.get(g, largest)?.score_result(targets)
    }

    pub fn len(&self) -> usize {
        self.profiles.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::min_distance;
    use proptest::prelude::*;

    fn gen(mask: u64) -> Gf2Poly {
        Gf2Poly::new(mask).unwrap()
    }

    fn runs(triples: &[(usize, usize, u32)]) -> Vec<Run> {
        triples
            .iter()
            .map(|&(n_lo, n_hi, d)| Run { n_lo, n_hi, d })
            .collect()
    }

    #[test]
    fn profile_of_1a2eb() {
        let prof = build_profile(gen(0x1a2eb), 512).unwrap();
        assert_eq!(prof.runs, runs(&[(17, 18, 10), (19, 27, 8), (28, 109, 6), (110, 512, 4)]));
        assert_eq!(prof.score(512).unwrap(), Score::Value(2 * 10 + 9 * 8 + 82 * 6 + 403 * 4));
        assert_eq!(prof.score(512).unwrap(), Score::Value(2196));
        assert!(prof.evaluations < 40, "{} evaluations", prof.evaluations);
    }

    #[test]
    fn profile_of_158ff() {
        let prof = build_profile(gen(0x158ff), 512).unwrap();
        assert_eq!(prof.runs, runs(&[(17, 17, 12), (18, 25, 8), (26, 111, 6), (112, 512, 4)]));
    }

    #[test]
    fn profile_of_hamming() {
        let prof = build_profile(gen(0xb), 7).unwrap();
        assert_eq!(prof.runs, runs(&[(4, 7, 3)]));
        assert_eq!(prof.score(7).unwrap(), Score::Value(12));
    }

    #[test]
    fn table_one_scores() {
        assert_eq!(build_profile(gen(0x93f), 512).unwrap().score(512).unwrap(), Score::Value(2044));
        let a0f = build_profile(gen(0xa0f), 512).unwrap();
        assert_eq!(a0f.order, 146);
        assert_eq!(a0f.covered_until(), 146);
        assert_eq!(a0f.score(512).unwrap(), Score::Inapplicable);
    }

    #[test]
    fn score_outside_built_range() {
        let prof = build_profile(gen(0x93f), 100).unwrap();
        assert!(prof.score(101).is_err());
        assert!(prof.score(11).is_err());
        assert!(build_profile(gen(0x93f), 11).is_err());
    }

    #[test]
    fn order_below_first_length_gives_empty_profile() {
        // x^4 + 1 has order 4 < p + 1
        let prof = build_profile(gen(0x11), 20).unwrap();
        assert!(prof.runs.is_empty());
        assert_eq!(prof.score(20).unwrap(), Score::Inapplicable);
    }

    #[test]
    fn csv_rows() {
        let prof = build_profile(gen(0xb), 7).unwrap();
        assert_eq!(prof.to_csv(), "poly_hex,n_lo,n_hi,d\nb,4,7,3\n");
    }

    #[test]
    fn cache_reuses_larger_build_and_reciprocal() {
        let cache = ProfileCache::new();
        let g = gen(0x1a2eb);
        let big = cache.get(g, 1024).unwrap();
        let small = cache.get(g.reciprocal(), 512).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(small.poly, g.reciprocal());
        assert_eq!(small.runs, build_profile(g, 512).unwrap().runs);
        assert_eq!(big.score(512).unwrap(), small.score(512).unwrap());
    }

    #[test]
    fn score_bounds_bracket_the_final_score() {
        let g = gen(0x1a2eb);
        let order = g.order().unwrap();
        let mut engine = DistanceEngine::new(g).unwrap();
        let mut builder = ProfileBuilder::new(&mut engine, order, 1024, &[512]).unwrap();
        let mut brackets = Vec::new();
        loop {
            brackets.push((builder.score_bounds(512), builder.score_bounds(1024)));
            if !builder.step().unwrap() {
                break;
            }
        }
        let prof = builder.finish().unwrap();
        let (s512, s1024) = (prof.score(512).unwrap().value().unwrap(), prof.score(1024).unwrap().value().unwrap());
        for ((lo1, hi1), (lo2, hi2)) in brackets.iter().copied() {
            assert!(lo1 <= s512 && s512 <= hi1);
            assert!(lo2 <= s1024 && s1024 <= hi2);
        }
        assert_eq!(brackets.last().unwrap().0, (s512, s512));
    }

    fn arb_generator(lo: u32, hi: u32) -> impl Strategy<Value = Gf2Poly> {
        (lo..=hi, any::<u64>()).prop_map(|(p, bits)| gen((bits & ((1u64 << p) - 1)) | (1 << p) | 1))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn binary_split_matches_dense_evaluation(g in arb_generator(3, 12), m in 20usize..256) {
            let p = g.degree() as usize;
            prop_assume!(m > p);
            let prof = build_profile(g, m).unwrap();
            let limit = (m as u64).min(prof.order) as usize;
            let mut prev = u32::MAX;
            for (i, n) in (p + 1..=limit).enumerate() {
                let d = min_distance(g, n).unwrap();
                prop_assert_eq!(prof.distance_at(n), Some(d), "n = {}", n);
                if i == 0 {
                    prop_assert_eq!(d, g.weight());
                }
                prop_assert!(d <= prev);
                prev = d;
            }
            prop_assert_eq!(prof.distance_at(limit + 1), None);
            for pair in prof.runs.windows(2) {
                prop_assert_eq!(pair[0].n_hi + 1, pair[1].n_lo);
                prop_assert!(pair[0].d > pair[1].d);
            }
        }

        #[test]
        fn score_is_additive(g in arb_generator(6, 12), m1 in 60usize..200, extra in 1usize..200) {
            let m2 = m1 + extra;
            let prof = build_profile(g, m2).unwrap();
            prop_assume!(prof.order >= m2 as u64);
            let s1 = prof.score(m1).unwrap().value().unwrap();
            let s2 = prof.score(m2).unwrap().value().unwrap();
            let tail: u64 = (m1 + 1..=m2).map(|n| prof.distance_at(n).unwrap() as u64).sum();
            prop_assert_eq!(s2, s1 + tail);
        }
    }
}
