//! Marked-set game.
//!
//! A hidden k-subset `K` of `[n]` is marked. A pair query `(i, j)` answers
//! whether both elements are marked; a strong pair query reveals each flag.
//! Answering a false pair query with a fair coin turns pair answers into edge
//! answers of the planted clique model, so lower bounds proved here transfer.
//! Every probability in this module is an exact rational.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::oracle::{normalize_pair, pair_key, EdgeQuery, Vertex};
use crate::seed::{self, mix64, stream};

/// Largest `C(n, k)` for which k-subsets are enumerated.
pub const ENUMERATION_CAP: u64 = 10_000_000;
/// Largest number of distinct query pairs handled by inclusion-exclusion.
pub const INCLUSION_EXCLUSION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkedInstance {
    n: u32,
    k: u32,
    marked: Vec<Vertex>,
    seed: u64,
    #[serde(skip)]
    flag: Vec<bool>,
}

fn check_nk(n: u32, k: u32) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::param(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

impl MarkedInstance {
    /// Uniform k-subset of `[n]` drawn from `seed`.
    pub fn sample(n: u32, k: u32, seed: u64) -> Result<Self> {
        check_nk(n, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[stream::MARKED]));
        let marked = rand::seq::index::sample(&mut rng, n as usize, k as usize)
            .into_iter()
            .map(|v| v as Vertex + 1)
            .collect();
        Self::build(n, marked, seed)
    }

    /// Instance with a given marked set (used by exhaustive enumeration).
    pub fn from_marked(n: u32, marked: Vec<Vertex>) -> Result<Self> {
        check_nk(n, marked.len() as u32)?;
        Self::build(n, marked, 0)
    }

    fn build(n: u32, mut marked: Vec<Vertex>, seed: u64) -> Result<Self> {
        marked.sort_unstable();
        let mut flag = vec![false; n as usize + 1];
        for &v in &marked {
            if v == 0 || v > n || flag[v as usize] {
                return Err(Error::param(format!("invalid marked element {v}")));
            }
            flag[v as usize] = true;
        }
        Ok(MarkedInstance {
            n,
            k: marked.len() as u32,
            marked,
            seed,
            flag,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn marked(&self) -> &[Vertex] {
        &self.marked
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_marked(&self, v: Vertex) -> bool {
        self.flag.get(v as usize).copied().unwrap_or(false)
    }

    /// True iff both elements are marked.
    pub fn pair_query(&self, i: Vertex, j: Vertex) -> Result<bool> {
        let (a, b) = normalize_pair(self.n, i, j)?;
        Ok(self.flag[a as usize] && self.flag[b as usize])
    }

    /// Marked flags of `i` and `j`, in argument order.
    pub fn strong_pair_query(&self, i: Vertex, j: Vertex) -> Result<(bool, bool)> {
        normalize_pair(self.n, i, j)?;
        Ok((self.flag[i as usize], self.flag[j as usize]))
    }
}

/// Edge answer built from a pair answer: a true pair is an edge, a false pair
/// is decided by one fair coin. The coin is only drawn when needed.
pub fn simulate_edge_from_pair(pair_answer: bool, coin: impl FnOnce() -> bool) -> bool {
    pair_answer || coin()
}

/// Edge oracle backed by a marked instance through [`simulate_edge_from_pair`].
/// Coins are derived per pair from the instance seed, so answers are stable.
#[derive(Debug, Clone)]
pub struct SimulatedEdgeOracle {
    instance: MarkedInstance,
    coin_key: u64,
    seen: FxHashSet<u64>,
    budget: Option<u64>,
}

impl SimulatedEdgeOracle {
    pub fn new(instance: MarkedInstance, coin_seed: u64, budget: Option<u64>) -> Self {
        SimulatedEdgeOracle {
            instance,
            coin_key: seed::derive(coin_seed, &[stream::COINS]),
            seen: FxHashSet::default(),
            budget,
        }
    }

    pub fn instance(&self) -> &MarkedInstance {
        &self.instance
    }
}

impl EdgeQuery for SimulatedEdgeOracle {
    fn n(&self) -> u32 {
        self.instance.n
    }

    fn query_edge(&mut self, i: Vertex, j: Vertex) -> Result<bool> {
        let (a, b) = normalize_pair(self.instance.n, i, j)?;
        let key = pair_key(a, b);
        if !self.seen.contains(&key) {
            let used = self.seen.len() as u64;
            if let Some(budget) = self.budget {
                if used >= budget {
                    return Err(Error::BudgetExhausted { budget, used });
                }
            }
            self.seen.insert(key);
        }
        let pair = self.instance.pair_query(a, b)?;
        let coin_key = self.coin_key;
        Ok(simulate_edge_from_pair(pair, || {
            mix64(coin_key ^ key) >> 63 == 1
        }))
    }

    fn queries_used(&self) -> u64 {
        self.seen.len() as u64
    }

    fn remaining_budget(&self) -> Option<u64> {
        self.budget.map(|b| b - self.seen.len() as u64)
    }
}

/// Ordered list of normalized query pairs. Repeats are kept but flagged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuerySet {
    pairs: Vec<(Vertex, Vertex)>,
    duplicate: Vec<bool>,
}

impl QuerySet {
    pub fn new(n: u32, pairs: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut seen = FxHashSet::default();
        let mut out = Vec::with_capacity(pairs.len());
        let mut duplicate = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            let p = normalize_pair(n, i, j)?;
            duplicate.push(!seen.insert(p));
            out.push(p);
        }
        Ok(QuerySet {
            pairs: out,
            duplicate,
        })
    }

    pub fn empty() -> Self {
        QuerySet {
            pairs: Vec::new(),
            duplicate: Vec::new(),
        }
    }

    pub fn pairs(&self) -> &[(Vertex, Vertex)] {
        &self.pairs
    }

    /// `q`, counting repeats.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Per-position flag: this pair already occurred earlier in the list.
    pub fn duplicate_flags(&self) -> &[bool] {
        &self.duplicate
    }

    pub fn has_duplicates(&self) -> bool {
        self.duplicate.iter().any(|&d| d)
    }

    pub fn distinct(&self) -> Vec<(Vertex, Vertex)> {
        self.pairs
            .iter()
            .zip(&self.duplicate)
            .filter(|(_, &d)| !d)
            .map(|(&p, _)| p)
            .collect()
    }
}

pub(crate) fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    binomial(BigUint::from(n), BigUint::from(k))
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// How the forbidden family is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    /// Enumeration when `C(n,k)` is within the cap, else inclusion-exclusion
    /// when the distinct pairs are few enough.
    Auto,
    Enumerate,
    InclusionExclusion,
}

/// Number of k-subsets of `[n]` that contain both endpoints of at least one
/// queried pair.
pub fn count_forbidden(n: u32, k: u32, queries: &QuerySet, method: CountMethod) -> Result<BigUint> {
    check_nk(n, k)?;
    let pairs = queries.distinct();
    for &(_, b) in &pairs {
        if b > n {
            return Err(Error::param(format!("query element {b} exceeds n = {n}")));
        }
    }
    let total = binom(u64::from(n), u64::from(k));
    let within_cap = total <= BigUint::from(ENUMERATION_CAP);
    let infeasible = || Error::EnumerationInfeasible {
        n: u64::from(n),
        k: u64::from(k),
        queries: pairs.len(),
        cap: ENUMERATION_CAP,
        ie_limit: INCLUSION_EXCLUSION_LIMIT,
    };
    let method = match method {
        CountMethod::Auto if within_cap => CountMethod::Enumerate,
        CountMethod::Auto if pairs.len() <= INCLUSION_EXCLUSION_LIMIT => {
            CountMethod::InclusionExclusion
        }
        CountMethod::Auto => return Err(infeasible()),
        m => m,
    };
    match method {
        CountMethod::Enumerate if within_cap => {
            Ok(total - BigUint::from(count_avoiding(n, k, &pairs)))
        }
        CountMethod::InclusionExclusion if pairs.len() <= INCLUSION_EXCLUSION_LIMIT => {
            Ok(inclusion_exclusion(n, k, &pairs))
        }
        _ => Err(infeasible()),
    }
}

/// k-subsets containing no queried pair, by depth-first enumeration with the
/// pairs as a conflict graph.
fn count_avoiding(n: u32, k: u32, pairs: &[(Vertex, Vertex)]) -> u64 {
    let n = n as usize;
    let mut later: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for &(a, b) in pairs {
        later[a as usize].push(b as usize);
    }
    // blocked[v] > 0 iff v conflicts with an already chosen element
    let mut blocked = vec![0u32; n + 2];

    fn go(v: usize, left: usize, n: usize, later: &[Vec<usize>], blocked: &mut [u32]) -> u64 {
        if left == 0 {
            return 1;
        }
        if n + 1 - v < left {
            return 0;
        }
        // skip v
        let mut total = go(v + 1, left, n, later, blocked);
        if blocked[v] == 0 {
            for &w in &later[v] {
                blocked[w] += 1;
            }
            total += go(v + 1, left - 1, n, later, blocked);
            for &w in &later[v] {
                blocked[w] -= 1;
            }
        }
        total
    }
    go(1, k as usize, n, &later, &mut blocked)
}

fn inclusion_exclusion(n: u32, k: u32, pairs: &[(Vertex, Vertex)]) -> BigUint {
    let q = pairs.len();
    // memoize binomials by the size of the covered vertex set
    let coeff: Vec<BigUint> = (0..=2 * q as u64)
        .map(|c| {
            if c > u64::from(k) {
                BigUint::zero()
            } else {
                binom(u64::from(n) - c, u64::from(k) - c)
            }
        })
        .collect();
    let mut plus = BigUint::zero();
    let mut minus = BigUint::zero();
    let mut covered: Vec<Vertex> = Vec::with_capacity(2 * q);
    for mask in 1u32..(1u32 << q) {
        covered.clear();
        for (b, &(x, y)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                covered.push(x);
                covered.push(y);
            }
        }
        covered.sort_unstable();
        covered.dedup();
        let term = &coeff[covered.len()];
        if mask.count_ones() % 2 == 1 {
            plus += term;
        } else {
            minus += term;
        }
    }
    plus - minus
}

/// Probability that every queried pair answers false under a uniform marked
/// k-subset: `1 - |S_q| / C(n, k)`.
pub fn exact_prob_all_false(n: u32, k: u32, queries: &QuerySet) -> Result<BigRational> {
    exact_prob_all_false_with(n, k, queries, CountMethod::Auto)
}

pub fn exact_prob_all_false_with(
    n: u32,
    k: u32,
    queries: &QuerySet,
    method: CountMethod,
) -> Result<BigRational> {
    let forbidden = count_forbidden(n, k, queries, method)?;
    let total = binom(u64::from(n), u64::from(k));
    Ok(ratio(&total - forbidden, total))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllFalseBound {
    #[serde(flatten)]
    pub value: RationalReport,
    /// `q <= n(n-1) / (k(k-1)) - 1`, under which the bound is proved.
    pub hypothesis_holds: bool,
}

/// `1 - q k(k-1) / (n(n-1))`. Computed even when `q` is outside the range the
/// inequality is proved for; `hypothesis_holds` says which case applies.
pub fn lower_bound_prob_all_false(n: u32, k: u32, q: u64) -> Result<AllFalseBound> {
    check_nk(n, k)?;
    if n < 2 {
        return Err(Error::param("pair queries need n >= 2"));
    }
    let (n, k) = (u64::from(n), u64::from(k));
    let nn = BigInt::from(n * (n - 1));
    let kk = BigInt::from(k * (k - 1));
    let value = BigRational::one() - BigRational::new(BigInt::from(q) * &kk, nn.clone());
    // q + 1 <= n(n-1) / (k(k-1)), vacuous for k = 1
    let hypothesis_holds = k < 2 || BigInt::from(q + 1) * kk <= nn;
    Ok(AllFalseBound {
        value: RationalReport::new(value),
        hypothesis_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HypergeomSpec {
    pub population: u64,
    pub successes: u64,
    pub draws: u64,
}

impl HypergeomSpec {
    pub fn new(population: u64, successes: u64, draws: u64) -> Result<Self> {
        if successes > population || draws > population {
            return Err(Error::param(format!(
                "hypergeometric spec ({population}, {successes}, {draws}) out of range"
            )));
        }
        Ok(HypergeomSpec {
            population,
            successes,
            draws,
        })
    }

    /// Smallest and largest values with positive mass.
    pub fn support(&self) -> (u64, u64) {
        let lo = (self.draws + self.successes).saturating_sub(self.population);
        (lo, self.successes.min(self.draws))
    }

    pub fn mean(&self) -> f64 {
        self.draws as f64 * self.successes as f64 / self.population as f64
    }

    /// All masses over `0..=draws`, sharing one denominator.
    pub fn pmf_table(&self) -> Vec<BigRational> {
        let den = binom(self.population, self.draws);
        (0..=self.draws)
            .map(|x| ratio(self.numerator(x), den.clone()))
            .collect()
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: u64) -> BigRational {
        let den = binom(self.population, self.draws);
        let num = (0..=x.min(self.draws)).map(|i| self.numerator(i)).sum();
        ratio(num, den)
    }

    fn numerator(&self, x: u64) -> BigUint {
        if x > self.successes || x > self.draws || self.draws - x > self.population - self.successes
        {
            return BigUint::zero();
        }
        binom(self.successes, x) * binom(self.population - self.successes, self.draws - x)
    }
}

/// `C(k, x) C(n-k, draws-x) / C(n, draws)`, zero off the support.
pub fn hypergeom_pmf(spec: &HypergeomSpec, x: u64) -> BigRational {
    ratio(spec.numerator(x), binom(spec.population, spec.draws))
}

/// Success probability of the best estimator after the strong pair queries
/// `(1,2), ..., (2q-1, 2q)`: `E[1 / C(n - 2q, k - X)]` with
/// `X ~ Hypergeom(n, k, 2q)`.
pub fn exact_recovery_success(n: u32, k: u32, q: u64) -> Result<BigRational> {
    check_nk(n, k)?;
    let (n, k) = (u64::from(n), u64::from(k));
    if 2 * q > n {
        return Err(Error::param(format!("2q = {} exceeds n = {n}", 2 * q)));
    }
    let spec = HypergeomSpec::new(n, k, 2 * q)?;
    let den = binom(n, 2 * q);
    let (lo, hi) = spec.support();
    let mut sum = BigRational::zero();
    for x in lo..=hi {
        // k - x <= n - 2q on the support
        sum += ratio(spec.numerator(x), &den * binom(n - 2 * q, k - x));
    }
    Ok(sum)
}

/// Which regime of `k` against `2q` a bound applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundCase {
    /// `k <= 2q`.
    SmallClique,
    /// `2q < k < n - 2q`.
    Middle,
    /// `n - 2q <= k`.
    LargeClique,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessBound {
    pub case: BoundCase,
    /// Bound on `E[1 / C(n - 2q, k - X)]`.
    #[serde(serialize_with = "as_report")]
    pub bound: BigRational,
    /// Point mass of `X` appearing in the bound: `P(X = k)` or
    /// `P(X = k - (n - 2q))`. Absent in the middle case.
    #[serde(serialize_with = "as_report_opt")]
    pub point_mass: Option<BigRational>,
    /// `2q / n`, the bound on `point_mass`.
    #[serde(serialize_with = "as_report")]
    pub point_mass_cap: BigRational,
}

/// Finite-`n` bounds on the recovery success probability, valid for
/// `1 <= q < n/4` and `1 <= k < n`.
pub fn success_bound(n: u32, k: u32, q: u64) -> Result<SuccessBound> {
    check_nk(n, k)?;
    let (n, k) = (u64::from(n), u64::from(k));
    if k >= n || q == 0 || 4 * q >= n {
        return Err(Error::param(format!(
            "bounds need 1 <= k < n and 1 <= q < n/4, got n = {n}, k = {k}, q = {q}"
        )));
    }
    let spec = HypergeomSpec::new(n, k, 2 * q)?;
    let two_over_n = BigRational::new(BigInt::from(2), BigInt::from(n));
    let cap = BigRational::new(BigInt::from(2 * q), BigInt::from(n));
    let (case, bound, point_mass) = if k <= 2 * q {
        let p = hypergeom_pmf(&spec, k);
        (BoundCase::SmallClique, &two_over_n + &p, Some(p))
    } else if k < n - 2 * q {
        let b = BigRational::new(BigInt::one(), BigInt::from(n - 2 * q));
        (BoundCase::Middle, b, None)
    } else {
        let p = hypergeom_pmf(&spec, k - (n - 2 * q));
        (BoundCase::LargeClique, &two_over_n + &p, Some(p))
    };
    Ok(SuccessBound {
        case,
        bound,
        point_mass,
        point_mass_cap: cap,
    })
}

/// Estimate from strong pair queries on `pairs`: the marked elements seen,
/// completed by a uniform fill from the unqueried elements drawn from
/// `fill_seed`.
pub fn strong_strategy_with_pairs(
    inst: &MarkedInstance,
    pairs: &[(Vertex, Vertex)],
    fill_seed: u64,
) -> Result<Vec<Vertex>> {
    let n = inst.n as usize;
    let mut queried = vec![false; n + 1];
    let mut found = Vec::new();
    for &(i, j) in pairs {
        let (mi, mj) = inst.strong_pair_query(i, j)?;
        for (v, m) in [(i, mi), (j, mj)] {
            if !queried[v as usize] {
                queried[v as usize] = true;
                if m {
                    found.push(v);
                }
            }
        }
    }
    let missing = inst.k as usize - found.len();
    if missing > 0 {
        let rest: Vec<Vertex> = (1..=inst.n).filter(|&v| !queried[v as usize]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(fill_seed, &[stream::FILL]));
        for idx in rand::seq::index::sample(&mut rng, rest.len(), missing) {
            found.push(rest[idx]);
        }
    }
    found.sort_unstable();
    Ok(found)
}

/// The strategy with queries `(1,2), (3,4), ..., (2q-1, 2q)`.
pub fn canonical_strong_strategy(
    inst: &MarkedInstance,
    q: u64,
    fill_seed: u64,
) -> Result<Vec<Vertex>> {
    if 2 * q > u64::from(inst.n) {
        return Err(Error::param(format!(
            "2q = {} exceeds n = {}",
            2 * q,
            inst.n
        )));
    }
    let pairs: Vec<(Vertex, Vertex)> = (1..=q as Vertex).map(|l| (2 * l - 1, 2 * l)).collect();
    strong_strategy_with_pairs(inst, &pairs, fill_seed)
}

/// Calls `f` on every k-subset of `[n]` in lexicographic order.
pub fn for_each_subset(n: u32, k: u32, mut f: impl FnMut(&[Vertex])) {
    let k = k as usize;
    if k > n as usize {
        return;
    }
    let mut cur: Vec<Vertex> = (1..=k as Vertex).collect();
    loop {
        f(&cur);
        // rightmost position that can still advance
        let Some(pos) = (0..k).rev().find(|&p| cur[p] < n - (k - 1 - p) as Vertex) else {
            return;
        };
        cur[pos] += 1;
        for p in pos + 1..k {
            cur[p] = cur[p - 1] + 1;
        }
    }
}

/// Exact success probability of the fixed strong-query schedule `pairs`
/// followed by a uniform fill, by enumerating every marked set.
pub fn schedule_success(n: u32, k: u32, pairs: &[(Vertex, Vertex)]) -> Result<BigRational> {
    check_nk(n, k)?;
    let total = binom(u64::from(n), u64::from(k));
    if total > BigUint::from(ENUMERATION_CAP) {
        return Err(Error::EnumerationInfeasible {
            n: u64::from(n),
            k: u64::from(k),
            queries: pairs.len(),
            cap: ENUMERATION_CAP,
            ie_limit: INCLUSION_EXCLUSION_LIMIT,
        });
    }
    let mut queried = vec![false; n as usize + 1];
    for &(i, j) in pairs {
        let (a, b) = normalize_pair(n, i, j)?;
        queried[a as usize] = true;
        queried[b as usize] = true;
    }
    let seen = queried.iter().filter(|&&q| q).count() as u64;
    // number of marked sets by how many marked elements were seen
    let mut by_x = vec![0u64; k as usize + 1];
    for_each_subset(n, k, |s| {
        by_x[s.iter().filter(|&&v| queried[v as usize]).count()] += 1;
    });
    let mut sum = BigRational::zero();
    for (x, &count) in by_x.iter().enumerate() {
        if count > 0 {
            let fills = binom(u64::from(n) - seen, u64::from(k) - x as u64);
            sum += ratio(BigUint::from(count), &total * fills);
        }
    }
    Ok(sum)
}

/// Query policy: the next pair to ask given the answers so far, or `None` to
/// stop.
pub type Transcript = Vec<(Vertex, Vertex, bool)>;

/// Exact law of the transcript an edge-query policy sees when its queries are
/// answered by pair queries on a uniform marked k-subset of `[n]`, with every
/// false pair replaced by a fair coin. Intended for tiny `n` only.
pub fn simulated_transcript_law<P>(
    n: u32,
    k: u32,
    max_queries: usize,
    policy: P,
) -> Result<BTreeMap<Transcript, BigRational>>
where
    P: Fn(&[(Vertex, Vertex, bool)]) -> Option<(Vertex, Vertex)>,
{
    check_nk(n, k)?;
    let total = binom(u64::from(n), u64::from(k));
    if total > BigUint::from(ENUMERATION_CAP) {
        return Err(Error::param("transcript law is only available for tiny n"));
    }
    let prior = ratio(BigUint::one(), total);
    let mut law: BTreeMap<Transcript, BigRational> = BTreeMap::new();
    let mut err = None;
    for_each_subset(n, k, |s| {
        if err.is_some() {
            return;
        }
        let inst = match MarkedInstance::from_marked(n, s.to_vec()) {
            Ok(i) => i,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let mut path = Vec::new();
        if let Err(e) = walk(
            &inst,
            &policy,
            max_queries,
            &mut path,
            prior.clone(),
            &mut law,
        ) {
            err = Some(e);
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(law),
    }
}

fn walk<P>(
    inst: &MarkedInstance,
    policy: &P,
    max_queries: usize,
    path: &mut Transcript,
    weight: BigRational,
    law: &mut BTreeMap<Transcript, BigRational>,
) -> Result<()>
where
    P: Fn(&[(Vertex, Vertex, bool)]) -> Option<(Vertex, Vertex)>,
{
    let next = if path.len() < max_queries {
        policy(path)
    } else {
        None
    };
    let Some((i, j)) = next else {
        *law.entry(path.clone()).or_insert_with(BigRational::zero) += weight;
        return Ok(());
    };
    // a repeated pair gets its earlier answer, as from a cached edge oracle
    let key = normalize_pair(inst.n, i, j)?;
    let earlier = path
        .iter()
        .find(|&&(a, b, _)| normalize_pair(inst.n, a, b).ok() == Some(key))
        .map(|&(_, _, ans)| ans);
    if let Some(answer) = earlier {
        path.push((i, j, answer));
        walk(inst, policy, max_queries, path, weight, law)?;
        path.pop();
        return Ok(());
    }
    let pair = inst.pair_query(i, j)?;
    // enumerate both coin outcomes; a true pair never reads its coin
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut outcomes: Vec<(bool, BigRational)> = Vec::with_capacity(2);
    for coin in [false, true] {
        let mut read = false;
        let answer = simulate_edge_from_pair(pair, || {
            read = true;
            coin
        });
        if read {
            outcomes.push((answer, &weight * &half));
        } else {
            outcomes.push((answer, weight.clone()));
            break;
        }
    }
    for (answer, w) in outcomes {
        path.push((i, j, answer));
        walk(inst, policy, max_queries, path, w, law)?;
        path.pop();
    }
    Ok(())
}

/// Exact rational with a decimal approximation, serialized as
/// `{"value": "num/den", "decimal": ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalReport(pub BigRational);

impl RationalReport {
    pub fn new(r: BigRational) -> Self {
        RationalReport(r)
    }

    pub fn decimal(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Always `num/den`, including integers (`1/1`).
    pub fn fraction(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for RationalReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RationalReport", 2)?;
        st.serialize_field("value", &self.fraction())?;
        st.serialize_field("decimal", &crate::fmt::Sig6(self.decimal()))?;
        st.end()
    }
}

fn as_report<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    RationalReport::new(r.clone()).serialize(s)
}

fn as_report_opt<S: Serializer>(
    r: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    r.clone().map(RationalReport::new).serialize(s)
}
