//! Nonadaptive detection: query every pair inside a fixed vertex set `S` of
//! size `m ~ (2 + eps') (n/k) log2 n` and accept the planted hypothesis when
//! the induced subgraph has a clique of size `(2 + eps'/2) log2 n`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{EdgeQuery, Hypothesis, Vertex};
use crate::seed::{self, stream};
use crate::solver::{
    build_from_oracle, find_clique_at_least, greedy_clique, max_clique_from_above,
};

/// Slack used when rounding real-valued sizes up, so that values which are
/// integers up to floating error do not round to the next integer.
const CEIL_SLACK: f64 = 1e-9;

pub(crate) fn ceil_count(x: f64) -> u64 {
    (x - CEIL_SLACK).ceil().max(0.0) as u64
}

/// How the vertex set `S` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubsetMode {
    /// `S = {1, ..., m}`.
    FirstM,
    /// Uniform `m`-subset drawn from the given seed.
    RandomSeeded(u64),
}

/// How the test statistic is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Statistic {
    /// Exact clique number of the induced subgraph.
    #[default]
    Exact,
    /// Stops at the first clique reaching the threshold, so the reported
    /// size is a lower bound on the clique number either way (a greedy one
    /// below the threshold). The decision is identical to `Exact`.
    Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionParams {
    pub n: u32,
    pub k: u32,
    pub eps0: f64,
    pub eps_prime: f64,
    pub m: u32,
    pub threshold: u32,
    /// `m` was clamped to `n`.
    pub clamped: bool,
    #[serde(skip)]
    pub s_vertices: Vec<Vertex>,
}

/// Largest `eps'` allowed by the two constraints
/// `2 eps' + eps'^2 / 2 <= eps0` and `eps' <= k / log2 n - 2`.
pub fn eps_prime(n: u32, k: u32, eps0: f64) -> f64 {
    let lg = f64::from(n).log2();
    let budget_root = (4.0 + 2.0 * eps0).sqrt() - 2.0;
    budget_root.min(f64::from(k) / lg - 2.0)
}

pub fn derive_params(n: u32, k: u32, eps0: f64, s_mode: SubsetMode) -> Result<DetectionParams> {
    if n < 4 {
        return Err(Error::param(format!("detection needs n >= 4, got {n}")));
    }
    if k == 0 || k > n {
        return Err(Error::param(format!(
            "clique size k = {k} outside [1..{n}]"
        )));
    }
    if !(eps0.is_finite() && eps0 > 0.0) {
        return Err(Error::param(format!(
            "eps0 must be a positive real, got {eps0}"
        )));
    }
    let lg = f64::from(n).log2();
    if f64::from(k) / lg - 2.0 <= 0.0 {
        return Err(Error::BelowDetectability {
            n: u64::from(n),
            k: u64::from(k),
            bound: 2.0 * lg,
        });
    }
    let eps_prime = eps_prime(n, k, eps0);
    let raw_m = ceil_count((2.0 + eps_prime) * (f64::from(n) / f64::from(k)) * lg);
    let clamped = raw_m > u64::from(n);
    let m = raw_m.min(u64::from(n)) as u32;
    if clamped {
        log::warn!("subset size {raw_m} clamped to n = {n}");
    }
    let threshold = ceil_count((2.0 + eps_prime / 2.0) * lg) as u32;
    let s_vertices = match s_mode {
        SubsetMode::FirstM => (1..=m).collect(),
        SubsetMode::RandomSeeded(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(s, &[stream::SUBSET]));
            let mut v: Vec<Vertex> = rand::seq::index::sample(&mut rng, n as usize, m as usize)
                .into_iter()
                .map(|x| x as Vertex + 1)
                .collect();
            v.sort_unstable();
            v
        }
    };
    Ok(DetectionParams {
        n,
        k,
        eps0,
        eps_prime,
        m,
        threshold,
        clamped,
        s_vertices,
    })
}

impl DetectionParams {
    /// Number of pairs inside `S`, i.e. `C(m, 2)`.
    pub fn pair_count(&self) -> u64 {
        let m = u64::from(self.m);
        m * m.saturating_sub(1) / 2
    }

    /// Step used when the exact statistic has to search below the threshold.
    pub(crate) fn floor_step(&self) -> usize {
        (self.threshold as usize / 8).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub decision: Hypothesis,
    pub witness_size: u32,
    /// Whether `witness_size` is the exact clique number of the subgraph on S.
    pub witness_exact: bool,
    pub threshold: u32,
    pub m: u32,
    #[serde(serialize_with = "crate::fmt::serialize_sig6")]
    pub eps_prime: f64,
    /// Queries charged by this call.
    pub queries: u64,
    pub clamped: bool,
}

/// Runs detection with the exact statistic.
pub fn detect<Q: EdgeQuery + ?Sized>(
    oracle: &mut Q,
    params: &DetectionParams,
) -> Result<DetectionOutcome> {
    detect_with(oracle, params, Statistic::Exact)
}

pub fn detect_with<Q: EdgeQuery + ?Sized>(
    oracle: &mut Q,
    params: &DetectionParams,
    statistic: Statistic,
) -> Result<DetectionOutcome> {
    if oracle.n() != params.n {
        return Err(Error::param(format!(
            "oracle has n = {} but parameters were derived for n = {}",
            oracle.n(),
            params.n
        )));
    }
    let before = oracle.queries_used();
    let g = build_from_oracle(&params.s_vertices, oracle)?;
    let threshold = params.threshold as usize;
    let (witness_size, witness_exact) = match statistic {
        Statistic::Exact => (
            max_clique_from_above(&g, threshold, params.floor_step()).size,
            true,
        ),
        Statistic::Decision => match find_clique_at_least(&g, threshold) {
            Some(w) => (w.size, false),
            None => (greedy_clique(&g).size, false),
        },
    };
    let decision = if witness_size >= threshold {
        Hypothesis::Planted
    } else {
        Hypothesis::Null
    };
    Ok(DetectionOutcome {
        decision,
        witness_size: witness_size as u32,
        witness_exact,
        threshold: params.threshold,
        m: params.m,
        eps_prime: params.eps_prime,
        queries: oracle.queries_used() - before,
        clamped: params.clamped,
    })
}

/// Mean and variance bound of the number of planted vertices in `S`, which is
/// hypergeometric with population `n`, `k` successes and `m` draws.
pub fn expected_overlap(params: &DetectionParams) -> (f64, f64) {
    let frac = f64::from(params.k) / f64::from(params.n);
    let m = f64::from(params.m);
    (m * frac, m * frac * (1.0 - frac))
}

/// Worst-case query count `(2 + eps0) (n/k)^2 log2^2 n` of the detector.
pub fn detection_budget(n: u32, k: u32, eps0: f64) -> f64 {
    let lg = f64::from(n).log2();
    let ratio = f64::from(n) / f64::from(k);
    (2.0 + eps0) * ratio * ratio * lg * lg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{sample_instance, EdgeOracle};

    #[test]
    fn params_at_desk_scale() {
        let p = derive_params(65536, 2048, 4.0, SubsetMode::FirstM).unwrap();
        assert!((p.eps_prime - (12f64.sqrt() - 2.0)).abs() < 1e-12);
        assert!((p.eps_prime - 1.4641).abs() < 1e-4);
        assert_eq!(p.m, 1774);
        assert_eq!(p.threshold, 44);
        assert_eq!(p.s_vertices, (1..=1774).collect::<Vec<_>>());
        assert!(!p.clamped);
        assert!(2.0 * p.eps_prime + p.eps_prime * p.eps_prime / 2.0 <= 4.0 + 1e-12);
    }

    #[test]
    fn eps_prime_positive_root() {
        let e = eps_prime(1 << 20, 1 << 19, 0.5);
        assert!((e - (5f64.sqrt() - 2.0)).abs() < 1e-12);
        assert!((e - 0.23607).abs() < 1e-5);
    }

    #[test]
    fn below_detectability() {
        let err = derive_params(16, 4, 1.0, SubsetMode::FirstM).unwrap_err();
        assert!(matches!(err, Error::BelowDetectability { .. }));
        assert!(err
            .to_string()
            .contains("clique below detectability hypothesis"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_inputs() {
        assert!(derive_params(3, 3, 1.0, SubsetMode::FirstM).is_err());
        assert!(derive_params(64, 0, 1.0, SubsetMode::FirstM).is_err());
        assert!(derive_params(64, 65, 1.0, SubsetMode::FirstM).is_err());
        assert!(derive_params(64, 40, 0.0, SubsetMode::FirstM).is_err());
        assert!(derive_params(64, 40, f64::NAN, SubsetMode::FirstM).is_err());
    }

    #[test]
    fn random_subset_is_seeded() {
        let a = derive_params(4096, 512, 4.0, SubsetMode::RandomSeeded(3)).unwrap();
        let b = derive_params(4096, 512, 4.0, SubsetMode::RandomSeeded(3)).unwrap();
        let c = derive_params(4096, 512, 4.0, SubsetMode::RandomSeeded(4)).unwrap();
        assert_eq!(a.s_vertices, b.s_vertices);
        assert_ne!(a.s_vertices, c.s_vertices);
        assert_eq!(a.s_vertices.len(), a.m as usize);
        assert!(a.s_vertices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn whole_graph_clique_is_detected() {
        // k = n: m = ceil(3.464 * 6) = 21 <= 64, all internal edges forced
        let p = derive_params(64, 64, 4.0, SubsetMode::FirstM).unwrap();
        let inst = sample_instance(64, 64, Hypothesis::Planted, 1).unwrap();
        let mut o = EdgeOracle::new(inst, None);
        let out = detect(&mut o, &p).unwrap();
        assert_eq!(out.witness_size, p.m);
        assert!(p.m >= p.threshold);
        assert_eq!(out.decision, Hypothesis::Planted);
        assert_eq!(out.queries, p.pair_count());
    }

    #[test]
    fn subset_never_exceeds_n() {
        let p = derive_params(32, 20, 4.0, SubsetMode::FirstM).unwrap();
        // (2 + min(1.464, 4 - 2)) * 1.6 * 5 = 27.7 -> 28
        assert_eq!(p.m, 28);
        // eps' hits the k/log2 n - 2 cap, where m = n exactly
        for k in 11..=16 {
            let p = derive_params(32, k, 4.0, SubsetMode::FirstM).unwrap();
            assert_eq!(p.m, 32, "k = {k}");
            assert_eq!(p.s_vertices.len(), 32);
        }
    }

    #[test]
    fn overlap_moments() {
        let p = derive_params(65536, 2048, 4.0, SubsetMode::FirstM).unwrap();
        let (mean, var) = expected_overlap(&p);
        assert!((mean - 55.4375).abs() < 1e-12);
        assert!(var < mean);
        let p = derive_params(64, 64, 4.0, SubsetMode::FirstM).unwrap();
        assert_eq!(expected_overlap(&p), (f64::from(p.m), 0.0));
    }

    #[test]
    fn mean_overlap_exceeds_threshold() {
        for lg in 8..=20u32 {
            let n = 1u32 << lg;
            for k in [n / 64, n / 16, n / 4, n] {
                for eps0 in [0.5, 1.0, 2.0, 4.0, 8.0] {
                    let Ok(p) = derive_params(n, k, eps0, SubsetMode::FirstM) else {
                        continue;
                    };
                    if p.clamped {
                        continue;
                    }
                    let (mean, _) = expected_overlap(&p);
                    assert!(mean > f64::from(p.threshold) - 1.0, "{n} {k} {eps0}");
                    assert!(mean - (2.0 + p.eps_prime / 2.0) * f64::from(lg) > 0.0);
                }
            }
        }
    }

    #[test]
    fn decision_modes_agree() {
        for seed in 0..6 {
            let h = if seed % 2 == 0 {
                Hypothesis::Null
            } else {
                Hypothesis::Planted
            };
            let p = derive_params(4096, 512, 1.0, SubsetMode::FirstM).unwrap();
            let inst = sample_instance(4096, 512, h, seed).unwrap();
            let exact = detect(&mut EdgeOracle::new(inst.clone(), None), &p).unwrap();
            let fast =
                detect_with(&mut EdgeOracle::new(inst, None), &p, Statistic::Decision).unwrap();
            assert_eq!(exact.decision, fast.decision);
            assert_eq!(exact.queries, fast.queries);
            if fast.witness_exact {
                assert_eq!(exact.witness_size, fast.witness_size);
            } else {
                assert!(fast.witness_size <= exact.witness_size);
            }
        }
    }

    #[test]
    fn budget_exhaustion_propagates() {
        let p = derive_params(4096, 512, 4.0, SubsetMode::FirstM).unwrap();
        let inst = sample_instance(4096, 512, Hypothesis::Planted, 1).unwrap();
        let mut o = EdgeOracle::new(inst, Some(p.pair_count() - 1));
        assert!(detect(&mut o, &p).unwrap_err().is_budget_exhausted());
    }
}
