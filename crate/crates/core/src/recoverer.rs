//! Two-step recovery. Step 1 finds the largest clique `D` inside `S` exactly
//! as detection does. Step 2 keeps the vertices outside `S` that are adjacent
//! to every member of a small low-label subset `D'` of `D`.

use serde::Serialize;

use crate::detector::{ceil_count, DetectionParams};
use crate::error::{Error, Result};
use crate::oracle::{EdgeQuery, Hypothesis, PlantedInstance, Vertex};
use crate::solver::{build_from_oracle, max_clique_from_above};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecoveryOutcome {
    pub estimate: Vec<Vertex>,
    pub d_set: Vec<Vertex>,
    pub d_prime: Vec<Vertex>,
    pub t_set: Vec<Vertex>,
    pub queries_step1: u64,
    pub queries_step2: u64,
}

/// Size of the filter set: `ceil((1 + eps0) log2 n)`.
pub fn filter_size(n: u32, eps0: f64) -> u64 {
    ceil_count((1.0 + eps0) * f64::from(n).log2())
}

/// Worst-case query count of both steps:
/// `(2 + eps0) (n/k)^2 log2^2 n + (1 + eps0) n log2 n`.
pub fn recovery_budget(n: u32, k: u32, eps0: f64) -> f64 {
    let lg = f64::from(n).log2();
    crate::detector::detection_budget(n, k, eps0) + (1.0 + eps0) * f64::from(n) * lg
}

pub fn recover<Q: EdgeQuery + ?Sized>(
    oracle: &mut Q,
    params: &DetectionParams,
    eps0: f64,
) -> Result<RecoveryOutcome> {
    if !(eps0.is_finite() && eps0 > 0.0) {
        return Err(Error::param(format!(
            "eps0 must be a positive real, got {eps0}"
        )));
    }
    if oracle.n() != params.n || params.s_vertices.len() != params.m as usize {
        return Err(Error::param("detection parameters do not match the oracle"));
    }
    let n = params.n;

    let before = oracle.queries_used();
    let g = build_from_oracle(&params.s_vertices, oracle)?;
    let step = (params.threshold as usize / 8).max(1);
    let d_set = max_clique_from_above(&g, params.threshold as usize, step).vertices;
    let queries_step1 = oracle.queries_used() - before;

    // D is sorted, so its lowest labels are a prefix
    let keep = filter_size(n, eps0).min(d_set.len() as u64) as usize;
    let d_prime = d_set[..keep].to_vec();

    let mut in_s = vec![false; n as usize + 1];
    for &v in &params.s_vertices {
        in_s[v as usize] = true;
    }
    let candidates: Vec<Vertex> = (1..=n).filter(|&v| !in_s[v as usize]).collect();

    let before = oracle.queries_used();
    let t_set = if d_prime.is_empty() {
        // nothing to filter against; only possible when S is empty
        Vec::new()
    } else {
        membership_filter(&d_prime, &candidates, oracle)?
    };
    let queries_step2 = oracle.queries_used() - before;

    let mut estimate = d_set.clone();
    estimate.extend_from_slice(&t_set);
    estimate.sort_unstable();

    Ok(RecoveryOutcome {
        estimate,
        d_set,
        d_prime,
        t_set,
        queries_step1,
        queries_step2,
    })
}

/// Candidates adjacent to every member of `d_prime`, in the order given.
/// A candidate is dropped at its first non-edge.
pub fn membership_filter<Q: EdgeQuery + ?Sized>(
    d_prime: &[Vertex],
    candidates: &[Vertex],
    oracle: &mut Q,
) -> Result<Vec<Vertex>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    if d_prime.is_empty() {
        return Err(Error::param("membership filter needs a nonempty D'"));
    }
    if let Some(v) = candidates.iter().find(|v| d_prime.contains(v)) {
        return Err(Error::param(format!(
            "candidate {v} is also a member of D'"
        )));
    }
    let mut out = Vec::new();
    for &v in candidates {
        let mut all = true;
        for &d in d_prime {
            if !oracle.query_edge(d, v)? {
                all = false;
                break;
            }
        }
        if all {
            out.push(v);
        }
    }
    Ok(out)
}

/// Exact-set success: the estimate equals the planted clique.
pub fn verify_estimate(outcome: &RecoveryOutcome, instance: &PlantedInstance) -> Result<bool> {
    if instance.hypothesis() == Hypothesis::Null {
        return Err(Error::param(
            "recovery can only be verified on a planted instance",
        ));
    }
    Ok(outcome.estimate == instance.clique())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{derive_params, SubsetMode};
    use crate::oracle::{sample_instance, EdgeOracle};

    fn outcome(estimate: Vec<Vertex>) -> RecoveryOutcome {
        RecoveryOutcome {
            estimate,
            d_set: vec![],
            d_prime: vec![],
            t_set: vec![],
            queries_step1: 0,
            queries_step2: 0,
        }
    }

    #[test]
    fn whole_graph() {
        let n = 64;
        let p = derive_params(n, n, 4.0, SubsetMode::FirstM).unwrap();
        let inst = sample_instance(n, n, Hypothesis::Planted, 9).unwrap();
        let mut o = EdgeOracle::new(inst.clone(), None);
        let mut p_all = p.clone();
        p_all.m = n;
        p_all.s_vertices = (1..=n).collect();
        let out = recover(&mut o, &p_all, 4.0).unwrap();
        assert_eq!(out.d_set, (1..=n).collect::<Vec<_>>());
        assert!(out.t_set.is_empty());
        assert_eq!(out.queries_step2, 0);
        assert!(verify_estimate(&out, &inst).unwrap());

        // with the derived m < n Step 2 sees the rest of the clique
        let mut o = EdgeOracle::new(inst.clone(), None);
        let out = recover(&mut o, &p, 4.0).unwrap();
        assert!(verify_estimate(&out, &inst).unwrap());
    }

    #[test]
    fn filter_size_at_desk_scale() {
        assert_eq!(filter_size(65536, 4.0), 80);
        assert_eq!(80 * (65536 - 1774), 5_100_960);
    }

    #[test]
    fn golden_seed_recovers_exactly() {
        let p = derive_params(4096, 512, 4.0, SubsetMode::FirstM).unwrap();
        let inst = sample_instance(4096, 512, Hypothesis::Planted, 20240601).unwrap();
        let mut o = EdgeOracle::new(inst.clone(), None);
        let out = recover(&mut o, &p, 4.0).unwrap();
        assert!(verify_estimate(&out, &inst).unwrap());
        assert_eq!(out.queries_step1, p.pair_count());
        assert!(out.queries_step2 <= out.d_prime.len() as u64 * u64::from(4096 - p.m));
        let d_prime_len = filter_size(4096, 4.0).min(out.d_set.len() as u64) as usize;
        assert_eq!(out.d_prime, out.d_set[..d_prime_len]);
    }

    #[test]
    fn filter_keeps_clique_members() {
        let inst = sample_instance(200, 40, Hypothesis::Planted, 3).unwrap();
        let clique = inst.clique().to_vec();
        let (d_prime, rest) = clique.split_at(10);
        let mut o = EdgeOracle::new(inst, None);
        assert_eq!(membership_filter(d_prime, rest, &mut o).unwrap(), rest);
        assert_eq!(o.queries_used(), 10 * 30);
    }

    #[test]
    fn filter_short_circuits() {
        let inst = sample_instance(200, 1, Hypothesis::Null, 3).unwrap();
        let mut o = EdgeOracle::new(inst, None);
        let cands: Vec<Vertex> = (21..=200).collect();
        let d: Vec<Vertex> = (1..=20).collect();
        let kept = membership_filter(&d, &cands, &mut o).unwrap();
        // a fair coin stops after two answers on average
        assert!(o.queries_used() < 3 * cands.len() as u64);
        assert!(kept.len() <= 1);
        assert_eq!(
            membership_filter(&d, &[], &mut o).unwrap(),
            Vec::<Vertex>::new()
        );
        assert!(membership_filter(&[], &cands, &mut o).is_err());
        assert!(membership_filter(&d, &[5], &mut o).is_err());
    }

    #[test]
    fn exact_set_criterion() {
        let inst = sample_instance(50, 10, Hypothesis::Planted, 1).unwrap();
        let k = inst.clique().to_vec();
        assert!(verify_estimate(&outcome(k.clone()), &inst).unwrap());
        let extra = (1..=50).find(|v| !k.contains(v)).unwrap();
        let mut more = k.clone();
        more.push(extra);
        more.sort_unstable();
        assert!(!verify_estimate(&outcome(more), &inst).unwrap());
        assert!(!verify_estimate(&outcome(k[1..].to_vec()), &inst).unwrap());
        let null = sample_instance(50, 10, Hypothesis::Null, 1).unwrap();
        assert!(verify_estimate(&outcome(k), &null).is_err());
    }

    #[test]
    fn budget_exhaustion_propagates() {
        let p = derive_params(4096, 512, 4.0, SubsetMode::FirstM).unwrap();
        let inst = sample_instance(4096, 512, Hypothesis::Planted, 1).unwrap();
        let mut o = EdgeOracle::new(inst, Some(p.pair_count() + 10));
        assert!(recover(&mut o, &p, 4.0).unwrap_err().is_budget_exhausted());
    }
}
