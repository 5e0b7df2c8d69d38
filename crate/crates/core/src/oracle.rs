//! Planted clique instances and the budget-charging edge oracle.
//!
//! Edges outside the planted clique are realized lazily: the answer for a pair
//! is a pure function of `(seed, i, j)`, so the oracle never materializes the
//! `n x n` matrix and the answers do not depend on the order of queries. The
//! oracle only has to remember which pairs were already charged.

use std::fmt;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, stream};

/// 1-based vertex id in `[1..n]`.
pub type Vertex = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    Null,
    Planted,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::Null => "Null",
            Hypothesis::Planted => "Planted",
        })
    }
}

/// Normalizes a pair to `(min, max)` after validating it against `n`.
pub fn normalize_pair(n: u32, i: Vertex, j: Vertex) -> Result<(Vertex, Vertex)> {
    if i == j {
        return Err(Error::param(format!(
            "self-pair ({i},{i}) is not a valid query"
        )));
    }
    for v in [i, j] {
        if v == 0 || v > n {
            return Err(Error::param(format!("vertex {v} outside [1..{n}]")));
        }
    }
    Ok(if i < j { (i, j) } else { (j, i) })
}

#[inline]
pub(crate) fn pair_key(i: Vertex, j: Vertex) -> u64 {
    (u64::from(i) << 32) | u64::from(j)
}

/// Ground truth of one G(n,1/2) or G(n,1/2,k) draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlantedInstance {
    n: u32,
    k: u32,
    hypothesis: Hypothesis,
    clique: Vec<Vertex>,
    seed: u64,
    #[serde(skip)]
    member: Vec<bool>,
    #[serde(skip)]
    edge_key: u64,
}

/// Draws an instance. Under `Planted` the clique is a uniform `k`-subset of
/// `[1..n]` determined by `seed`; under `Null` nothing is planted.
pub fn sample_instance(n: u32, k: u32, h: Hypothesis, seed: u64) -> Result<PlantedInstance> {
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    if k == 0 || k > n {
        return Err(Error::param(format!(
            "clique size k = {k} outside [1..{n}]"
        )));
    }
    let mut member = vec![false; n as usize + 1];
    let clique = match h {
        Hypothesis::Null => Vec::new(),
        Hypothesis::Planted => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[stream::CLIQUE]));
            let mut c: Vec<Vertex> = rand::seq::index::sample(&mut rng, n as usize, k as usize)
                .into_iter()
                .map(|v| v as Vertex + 1)
                .collect();
            c.sort_unstable();
            for &v in &c {
                member[v as usize] = true;
            }
            c
        }
    };
    Ok(PlantedInstance {
        n,
        k,
        hypothesis: h,
        clique,
        seed,
        member,
        edge_key: seed::derive(seed, &[stream::EDGES]),
    })
}

impl PlantedInstance {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.hypothesis
    }

    pub fn clique(&self) -> &[Vertex] {
        &self.clique
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn in_clique(&self, v: Vertex) -> bool {
        self.member.get(v as usize).copied().unwrap_or(false)
    }

    /// Fair coin of a normalized pair, before the clique is imposed.
    #[inline]
    fn coin(&self, i: Vertex, j: Vertex) -> bool {
        seed::mix64(self.edge_key ^ pair_key(i, j)) >> 63 == 1
    }

    /// The edge rule itself: forced true inside the clique, otherwise the
    /// pair's coin. Takes a normalized pair.
    #[inline]
    pub(crate) fn edge_normalized(&self, i: Vertex, j: Vertex) -> bool {
        (self.member[i as usize] && self.member[j as usize]) || self.coin(i, j)
    }

    /// Eagerly builds the full adjacency matrix (row-major, 0-based indices)
    /// from the same derivation rule the lazy oracle uses. Only meant for
    /// small `n`.
    pub fn materialize(&self) -> Vec<Vec<bool>> {
        let n = self.n as usize;
        let mut adj = vec![vec![false; n]; n];
        for i in 1..=self.n {
            for j in (i + 1)..=self.n {
                let e = self.edge_normalized(i, j);
                adj[i as usize - 1][j as usize - 1] = e;
                adj[j as usize - 1][i as usize - 1] = e;
            }
        }
        adj
    }
}

/// One answered query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub i: Vertex,
    pub j: Vertex,
    pub answer: bool,
}

/// Accounting of distinct queries against a budget.
#[derive(Debug, Clone, Default, Serialize)]
pub struct QueryLedger {
    /// `None` means unlimited.
    pub budget: Option<u64>,
    pub used: u64,
    /// Raw number of successful `query_edge` calls, repeats included.
    pub calls: u64,
    pub transcript: Option<Vec<QueryRecord>>,
}

impl QueryLedger {
    pub fn new(budget: Option<u64>, record: bool) -> Self {
        QueryLedger {
            budget,
            used: 0,
            calls: 0,
            transcript: record.then(Vec::new),
        }
    }

    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b - self.used)
    }

    fn exhausted(&self) -> bool {
        self.budget.is_some_and(|b| self.used >= b)
    }
}

/// Anything that answers adaptive edge queries on `[1..n]`.
///
/// The detector and recoverer are written against this trait so they can be
/// driven either by an [`EdgeOracle`] or by the pair-query simulation of the
/// marked-set variant.
pub trait EdgeQuery {
    fn n(&self) -> u32;

    fn query_edge(&mut self, i: Vertex, j: Vertex) -> Result<bool>;

    /// Distinct pairs charged so far.
    fn queries_used(&self) -> u64;

    /// `None` when unlimited.
    fn remaining_budget(&self) -> Option<u64>;
}

/// Adaptive edge oracle over a [`PlantedInstance`], charging one unit per
/// previously unseen normalized pair.
#[derive(Debug, Clone)]
pub struct EdgeOracle {
    instance: PlantedInstance,
    cache: FxHashMap<u64, bool>,
    ledger: QueryLedger,
}

impl EdgeOracle {
    pub fn new(instance: PlantedInstance, budget: Option<u64>) -> Self {
        Self::with_transcript(instance, budget, false)
    }

    pub fn with_transcript(instance: PlantedInstance, budget: Option<u64>, record: bool) -> Self {
        EdgeOracle {
            instance,
            cache: FxHashMap::default(),
            ledger: QueryLedger::new(budget, record),
        }
    }

    pub fn instance(&self) -> &PlantedInstance {
        &self.instance
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    /// Answer for `(i, j)` if it was already charged.
    pub fn cached(&self, i: Vertex, j: Vertex) -> Option<bool> {
        let (a, b) = normalize_pair(self.instance.n, i, j).ok()?;
        self.cache.get(&pair_key(a, b)).copied()
    }

    /// Reserves capacity for `additional` new pairs.
    pub fn reserve(&mut self, additional: usize) {
        self.cache.reserve(additional);
    }

    /// Writes the transcript as JSON lines `{"i":..,"j":..,"answer":..}`.
    pub fn write_transcript<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        if let Some(t) = &self.ledger.transcript {
            for rec in t {
                serde_json::to_writer(&mut out, rec)?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

impl EdgeQuery for EdgeOracle {
    fn n(&self) -> u32 {
        self.instance.n
    }

    fn query_edge(&mut self, i: Vertex, j: Vertex) -> Result<bool> {
        let (a, b) = normalize_pair(self.instance.n, i, j)?;
        let key = pair_key(a, b);
        if let Some(&ans) = self.cache.get(&key) {
            self.ledger.calls += 1;
            return Ok(ans);
        }
        if self.ledger.exhausted() {
            return Err(Error::BudgetExhausted {
                budget: self.ledger.budget.unwrap_or(u64::MAX),
                used: self.ledger.used,
            });
        }
        let ans = self.instance.edge_normalized(a, b);
        self.cache.insert(key, ans);
        self.ledger.used += 1;
        self.ledger.calls += 1;
        if let Some(t) = self.ledger.transcript.as_mut() {
            t.push(QueryRecord {
                i: a,
                j: b,
                answer: ans,
            });
        }
        Ok(ans)
    }

    fn queries_used(&self) -> u64 {
        self.ledger.used
    }

    fn remaining_budget(&self) -> Option<u64> {
        self.ledger.remaining()
    }
}
