//! Market instances, validation, degeneracy detection, the perturbation
//! setup, the Fisher reduction, and equality-edge computation.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, ToPrimitive, Zero};

use crate::error::{SolverError, SolverResult};
use crate::exactnum::{PowValue, Rational, SolverConfig};

/// A linear exchange market: `n` agents, agent `i` owns good `i`, integer
/// utilities `u[i][j] <= utility_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarketInstance {
    pub n: usize,
    pub utilities: Vec<Vec<u64>>,
    pub utility_bound: u64,
}

/// Structured validation failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Agent likes no good.
    ZeroRow(usize),
    /// Good is liked by nobody.
    ZeroColumn(usize),
    /// Proper agent subset with no positive utility leaving it.
    Disconnected(Vec<usize>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroRow(i) => write!(f, "agent {i} likes no good"),
            Violation::ZeroColumn(j) => write!(f, "good {j} is liked by no agent"),
            Violation::Disconnected(p) => {
                write!(f, "agent subset {p:?} has no positive utility to the outside")
            }
        }
    }
}

/// A cycle of the utility graph together with its alternating 2-coloring.
/// Edges are `(buyer, good)` pairs; adjacent cycle edges land in different
/// classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub edges: Vec<(usize, usize)>,
    pub class_a: Vec<(usize, usize)>,
    pub class_b: Vec<(usize, usize)>,
}

impl MarketInstance {
    pub fn new(utilities: Vec<Vec<u64>>, utility_bound: u64) -> SolverResult<Self> {
        let n = utilities.len();
        if n == 0 {
            return Err(SolverError::ParseError("empty utility matrix".into()));
        }
        for row in &utilities {
            if row.len() != n {
                return Err(SolverError::ParseError("utility matrix is not square".into()));
            }
            if row.iter().any(|&u| u > utility_bound) {
                return Err(SolverError::ParseError(format!(
                    "utility exceeds the stated bound {utility_bound}"
                )));
            }
        }
        Ok(MarketInstance {
            n,
            utilities,
            utility_bound,
        })
    }

    pub fn utility(&self, buyer: usize, good: usize) -> u64 {
        self.utilities[buyer][good]
    }

    /// All `(buyer, good)` pairs with positive utility, row-major.
    pub fn positive_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.utilities[i][j] > 0 {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    /// Check the three model assumptions: every agent likes some good, every
    /// good is liked, and every proper agent subset has positive utility to
    /// its complement (strong connectivity of the directed utility graph).
    pub fn validate(&self) -> Result<(), Violation> {
        for i in 0..self.n {
            if self.utilities[i].iter().all(|&u| u == 0) {
                return Err(Violation::ZeroRow(i));
            }
        }
        for j in 0..self.n {
            if (0..self.n).all(|i| self.utilities[i][j] == 0) {
                return Err(Violation::ZeroColumn(j));
            }
        }
        if self.n == 1 {
            return Ok(());
        }
        let forward = self.reach(0, false);
        if forward.iter().any(|&r| !r) {
            let p = (0..self.n).filter(|&i| forward[i]).collect();
            return Err(Violation::Disconnected(p));
        }
        let backward = self.reach(0, true);
        if backward.iter().any(|&r| !r) {
            let p = (0..self.n).filter(|&i| !backward[i]).collect();
            return Err(Violation::Disconnected(p));
        }
        Ok(())
    }

    fn reach(&self, start: usize, reversed: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for w in 0..self.n {
                let connected = if reversed {
                    self.utilities[w][v] > 0
                } else {
                    self.utilities[v][w] > 0
                };
                if connected && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Exact degeneracy test: some simple utility-graph cycle has equal
    /// alternating edge products.
    ///
    /// Cycles are enumerated by depth-first search over alternating
    /// buyer/good paths, each cycle visited once from its lowest-index
    /// buyer, carrying the exact rational potential ratio along the path.
    /// A closing edge whose ratio returns to one yields the witness.
    /// Worst-case exponential in the cycle count, which is fine at the
    /// instance sizes where an exact answer is wanted; the solver itself
    /// never needs this test (it perturbs unconditionally).
    pub fn degeneracy_witness(&self) -> Option<CycleWitness> {
        let n = self.n;
        for start in 0..n {
            let mut visited_buyers = vec![false; n];
            let mut visited_goods = vec![false; n];
            visited_buyers[start] = true;
            let mut path: Vec<(usize, usize)> = Vec::new();
            if let Some(cycle) = self.cycle_search(
                start,
                start,
                true,
                &mut visited_buyers,
                &mut visited_goods,
                &mut path,
                &mut Rational::one(),
            ) {
                let mut class_a = Vec::new();
                let mut class_b = Vec::new();
                for (idx, e) in cycle.iter().enumerate() {
                    if idx % 2 == 0 {
                        class_a.push(*e);
                    } else {
                        class_b.push(*e);
                    }
                }
                return Some(CycleWitness {
                    edges: cycle,
                    class_a,
                    class_b,
                });
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn cycle_search(
        &self,
        start: usize,
        vertex: usize,
        at_buyer: bool,
        visited_buyers: &mut Vec<bool>,
        visited_goods: &mut Vec<bool>,
        path: &mut Vec<(usize, usize)>,
        ratio: &mut Rational,
    ) -> Option<Vec<(usize, usize)>> {
        let n = self.n;
        if at_buyer {
            for j in 0..n {
                if self.utilities[vertex][j] == 0 || visited_goods[j] {
                    continue;
                }
                let u = Rational::from_integer(self.utilities[vertex][j].into());
                visited_goods[j] = true;
                path.push((vertex, j));
                *ratio *= &u;
                if let Some(c) =
                    self.cycle_search(start, j, false, visited_buyers, visited_goods, path, ratio)
                {
                    return Some(c);
                }
                *ratio /= &u;
                path.pop();
                visited_goods[j] = false;
            }
        } else {
            for i in 0..n {
                if self.utilities[i][vertex] == 0 {
                    continue;
                }
                let u = Rational::from_integer(self.utilities[i][vertex].into());
                if i == start {
                    // Closing edge; a simple cycle needs at least two goods.
                    if path.len() >= 3 && *ratio == u {
                        let mut cycle = path.clone();
                        cycle.push((start, vertex));
                        return Some(cycle);
                    }
                    continue;
                }
                // Canonical start: only cycles whose minimum buyer is the
                // start are enumerated from it.
                if i < start || visited_buyers[i] {
                    continue;
                }
                visited_buyers[i] = true;
                path.push((i, vertex));
                *ratio /= &u;
                if let Some(c) =
                    self.cycle_search(start, i, true, visited_buyers, visited_goods, path, ratio)
                {
                    return Some(c);
                }
                *ratio *= &u;
                path.pop();
                visited_buyers[i] = false;
            }
        }
        None
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracy_witness().is_some()
    }
}

/// A market instance with its deterministic perturbation: distinct primes
/// per positive-utility edge and the exponent pair representing each
/// perturbed utility.
#[derive(Clone, Debug)]
pub struct PerturbedInstance {
    pub base: MarketInstance,
    pub cfg: SolverConfig,
    /// Prime assigned to each positive-utility edge (row-major order).
    pub edge_primes: BTreeMap<(usize, usize), u64>,
    /// Perturbed utility of each positive edge as an exponent pair: the
    /// real exponent approximates the utility, the infinitesimal exponent
    /// approximates the edge prime.
    pub utilities: BTreeMap<(usize, usize), PowValue>,
}

/// Deterministically perturb a validated instance. Every equality graph of
/// the perturbed utilities is a forest: around any utility-graph cycle the
/// alternating sums of infinitesimal exponents differ, because the primes
/// do and the exponent rounding is too fine to cancel that gap.
pub fn perturb(inst: &MarketInstance) -> SolverResult<PerturbedInstance> {
    perturb_with_config(inst, SolverConfig::new(inst.n, inst.utility_bound.max(1)))
}

pub fn perturb_with_config(
    inst: &MarketInstance,
    cfg: SolverConfig,
) -> SolverResult<PerturbedInstance> {
    let edges = inst.positive_edges();
    assert!(
        cfg.primes().len() >= edges.len(),
        "prime pool is smaller than the edge count"
    );
    let mut edge_primes = BTreeMap::new();
    let mut utilities = BTreeMap::new();
    for (edge, &q) in edges.iter().zip(cfg.primes()) {
        let u = inst.utility(edge.0, edge.1);
        let real_exp = cfg.utility_exponent(u)?;
        let eps_exp = cfg.prime_exponent(q)?;
        edge_primes.insert(*edge, q);
        utilities.insert(*edge, PowValue::new(real_exp, eps_exp));
    }
    Ok(PerturbedInstance {
        base: inst.clone(),
        cfg,
        edge_primes,
        utilities,
    })
}

/// The equality edges at a price vector: for each buyer the set of goods
/// attaining its best utility-per-money ratio, plus that ratio.
#[derive(Clone, Debug)]
pub struct EqualityEdges {
    /// For each buyer, the argmax goods in ascending order.
    pub per_buyer: Vec<Vec<usize>>,
    /// The best ratio of each buyer.
    pub alpha: Vec<PowValue>,
}

impl EqualityEdges {
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (i, goods) in self.per_buyer.iter().enumerate() {
            for &j in goods {
                edges.push((i, j));
            }
        }
        edges
    }
}

/// Compute the equality edges of a perturbed instance at exact prices.
pub fn equality_edges(pinst: &PerturbedInstance, prices: &[PowValue]) -> EqualityEdges {
    let n = pinst.base.n;
    assert_eq!(prices.len(), n);
    let mut per_buyer = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<PowValue> = None;
        let mut goods: Vec<usize> = Vec::new();
        for j in 0..n {
            let Some(u) = pinst.utilities.get(&(i, j)) else {
                continue;
            };
            let ratio = u.div(&prices[j]);
            match &best {
                None => {
                    best = Some(ratio);
                    goods = vec![j];
                }
                Some(b) => match ratio.cmp(b) {
                    std::cmp::Ordering::Greater => {
                        best = Some(ratio);
                        goods = vec![j];
                    }
                    std::cmp::Ordering::Equal => goods.push(j),
                    std::cmp::Ordering::Less => {}
                },
            }
        }
        per_buyer.push(goods);
        alpha.push(best.expect("validated buyers like some good"));
    }
    EqualityEdges { per_buyer, alpha }
}

/// Result of reducing a Fisher market to the exchange form this solver
/// handles directly.
///
/// Buyers cannot own "a slice of every good" under the one-good-per-agent
/// convention, so the reduction doubles the market: each Fisher buyer owns a
/// token good and each original good gets a seller agent who values tokens
/// in proportion to the buyers' budgets. At equilibrium all sellers face the
/// same token ratios, forcing token prices proportional to budgets, which
/// hands every buyer exactly its Fisher budget. Dropping the token half and
/// rescaling yields the Fisher equilibrium.
#[derive(Clone, Debug)]
pub struct FisherReduction {
    /// The 2n-agent exchange instance. Agents `0..n` are the Fisher buyers
    /// (owning token goods `0..n`), agents `n..2n` are sellers owning the
    /// real goods `n..2n`.
    pub instance: MarketInstance,
    /// Original budgets.
    pub budgets: Vec<Rational>,
    /// Budgets scaled to integers by the common denominator.
    pub scaled_budgets: Vec<u64>,
    /// Number of Fisher buyers/goods.
    pub fisher_n: usize,
}

pub fn fisher_to_ad(budgets: &[Rational], utilities: &[Vec<u64>]) -> SolverResult<FisherReduction> {
    let n = budgets.len();
    if n == 0 || utilities.len() != n || utilities.iter().any(|r| r.len() != n) {
        return Err(SolverError::ParseError(
            "budgets and utility matrix sizes disagree".into(),
        ));
    }
    for (i, b) in budgets.iter().enumerate() {
        if *b <= Rational::zero() {
            return Err(SolverError::ParseError(format!(
                "budget of buyer {i} is not positive"
            )));
        }
    }
    for (i, row) in utilities.iter().enumerate() {
        if row.iter().all(|&u| u == 0) {
            return Err(SolverError::InvalidInstance(Violation::ZeroRow(i)));
        }
    }
    for j in 0..n {
        if (0..n).all(|i| utilities[i][j] == 0) {
            return Err(SolverError::InvalidInstance(Violation::ZeroColumn(j)));
        }
    }

    let mut denom_lcm = BigInt::one();
    for b in budgets {
        denom_lcm = num::Integer::lcm(&denom_lcm, b.denom());
    }
    let mut scaled_budgets = Vec::with_capacity(n);
    for b in budgets {
        let scaled = (b * Rational::from_integer(denom_lcm.clone())).to_integer();
        let scaled = scaled.to_u64().ok_or_else(|| {
            SolverError::ParseError("scaled budget exceeds the integer range".into())
        })?;
        scaled_budgets.push(scaled);
    }

    let size = 2 * n;
    let mut v = vec![vec![0u64; size]; size];
    for i in 0..n {
        for j in 0..n {
            v[i][n + j] = utilities[i][j];
        }
    }
    for j in 0..n {
        for i in 0..n {
            v[n + j][i] = scaled_budgets[i];
        }
    }
    let bound = scaled_budgets
        .iter()
        .copied()
        .chain(utilities.iter().flatten().copied())
        .max()
        .unwrap_or(1)
        .max(1);
    let instance = MarketInstance::new(v, bound)?;
    if let Err(violation) = instance.validate() {
        return Err(SolverError::InvalidInstance(violation));
    }
    Ok(FisherReduction {
        instance,
        budgets: budgets.to_vec(),
        scaled_budgets,
        fisher_n: n,
    })
}

impl FisherReduction {
    /// Recover Fisher prices from an equilibrium of the doubled instance:
    /// token prices must be proportional to the budgets, and the common
    /// ratio is the money scale to divide out.
    pub fn fisher_prices(&self, exchange_prices: &[Rational]) -> SolverResult<Vec<Rational>> {
        let n = self.fisher_n;
        assert_eq!(exchange_prices.len(), 2 * n);
        let scale = &exchange_prices[0]
            / Rational::from_integer(BigInt::from(self.scaled_budgets[0]));
        for i in 1..n {
            let s = &exchange_prices[i]
                / Rational::from_integer(BigInt::from(self.scaled_budgets[i]));
            if s != scale {
                return Err(SolverError::VerificationFailed(
                    "token prices are not proportional to budgets".into(),
                ));
            }
        }
        // Token price q_i = scale * A_i must equal the buyer budget a_i at
        // the Fisher scale, so real prices divide by scale * lcm.
        let mut denom_lcm = BigInt::one();
        for b in &self.budgets {
            denom_lcm = num::Integer::lcm(&denom_lcm, b.denom());
        }
        let divisor = &scale * Rational::from_integer(denom_lcm);
        Ok(self.budget_scale_prices(exchange_prices, &divisor))
    }

    fn budget_scale_prices(&self, exchange_prices: &[Rational], divisor: &Rational) -> Vec<Rational> {
        (0..self.fisher_n)
            .map(|j| &exchange_prices[self.fisher_n + j] / divisor)
            .collect()
    }
}
