//! Balanced flows by divide and conquer on surplus levels.
//!
//! The achievable buyer surplus vectors of a maximum flow form the base of
//! a supermodular set function `v(T) = cap(T) - cap(goods adjacent to T)`,
//! and the balanced (minimum 2-norm) surplus vector is its water-filling
//! point. A block of buyers is uniform at the mean level `lambda = ts/|V|`
//! exactly when no buyer subset has `v(T) > lambda * |T|`; otherwise any
//! maximizer of `v(T) - lambda * |T|` splits the block, the maximizer's
//! goods go with it, and both sides recurse. The split test is one max
//! flow with per-buyer bypass arcs of capacity `lambda`, or a linear tree
//! dynamic program when the equality edges form a forest.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};

use crate::error::{SolverError, SolverResult};
use crate::exactnum::Rational;

use super::forest::peel_forest_flow;
use super::maxflow::{infinite_cap, ResidualNet};
use super::{is_balanced, max_flow, EqualityNetwork, FlowState};

pub(crate) fn solve_balanced(
    net: &EqualityNetwork,
    forest_mode: bool,
) -> SolverResult<FlowState> {
    let flows = balanced_bipartite_flows(net, forest_mode)?;
    let fs = FlowState::from_flows(net, flows)?;
    if !is_balanced(net, &fs)? {
        return Err(SolverError::InvariantViolation(
            "balanced flow failed its balancedness audit".into(),
        ));
    }
    Ok(fs)
}

fn balanced_bipartite_flows(
    net: &EqualityNetwork,
    forest_mode: bool,
) -> SolverResult<BTreeMap<(usize, usize), Rational>> {
    let root = if forest_mode {
        super::forest_max_flow(net)?
    } else {
        max_flow(net, None)?
    };
    let ts = net.total_source() - &root.value;
    let buyers: Vec<usize> = (0..net.n).collect();
    let goods: Vec<usize> = (0..net.n).collect();
    let mut flows = BTreeMap::new();
    divide(net, buyers, goods, ts, forest_mode, &mut flows)?;
    Ok(flows)
}

fn induced_edges(net: &EqualityNetwork, buyers: &[usize], goods: &[usize]) -> Vec<(usize, usize)> {
    let buyer_set: BTreeSet<usize> = buyers.iter().copied().collect();
    let good_set: BTreeSet<usize> = goods.iter().copied().collect();
    net.edges
        .iter()
        .copied()
        .filter(|(b, g)| buyer_set.contains(b) && good_set.contains(g))
        .collect()
}

fn divide(
    net: &EqualityNetwork,
    buyers: Vec<usize>,
    goods: Vec<usize>,
    ts: Rational,
    forest_mode: bool,
    out: &mut BTreeMap<(usize, usize), Rational>,
) -> SolverResult<()> {
    if buyers.is_empty() {
        return Ok(());
    }
    if ts.is_negative() {
        return Err(SolverError::InvariantViolation(
            "negative block surplus in balanced flow recursion".into(),
        ));
    }
    let lambda = &ts / Rational::from_integer(buyers.len().into());
    let edges = induced_edges(net, &buyers, &goods);
    let (excess, dense) = if forest_mode {
        forest_split(net, &buyers, &goods, &edges, &lambda)
    } else {
        generic_split(net, &buyers, &goods, &edges, &lambda)
    };
    if excess.is_negative() {
        return Err(SolverError::InvariantViolation(
            "negative split excess in balanced flow recursion".into(),
        ));
    }
    if excess.is_zero() {
        return construct_uniform(net, &buyers, &goods, &edges, &lambda, forest_mode, out);
    }

    if dense.is_empty() || dense.len() == buyers.len() {
        return Err(SolverError::InvariantViolation(
            "balanced flow split produced a trivial block".into(),
        ));
    }
    let dense_set: BTreeSet<usize> = dense.iter().copied().collect();
    let good_set: BTreeSet<usize> = goods.iter().copied().collect();
    let mut gamma: BTreeSet<usize> = BTreeSet::new();
    for &(b, g) in &edges {
        if dense_set.contains(&b) && good_set.contains(&g) {
            gamma.insert(g);
        }
    }
    let ts_high: Rational = dense
        .iter()
        .map(|&b| net.source_caps[b].clone())
        .sum::<Rational>()
        - gamma.iter().map(|&g| net.sink_caps[g].clone()).sum::<Rational>();
    let low_buyers: Vec<usize> = buyers.iter().copied().filter(|b| !dense_set.contains(b)).collect();
    let low_goods: Vec<usize> = goods.iter().copied().filter(|g| !gamma.contains(g)).collect();
    let ts_low = &ts - &ts_high;
    divide(net, dense, gamma.into_iter().collect(), ts_high, forest_mode, out)?;
    divide(net, low_buyers, low_goods, ts_low, forest_mode, out)
}

/// Max flow with per-buyer bypass arcs of capacity `lambda`; the shortfall
/// against the full buyer capacity equals `max_T v(T) - lambda|T|`, and the
/// maximal min-cut source side carries the maximizer.
fn generic_split(
    net: &EqualityNetwork,
    buyers: &[usize],
    goods: &[usize],
    edges: &[(usize, usize)],
    lambda: &Rational,
) -> (Rational, Vec<usize>) {
    let bn = buyers.len();
    let gn = goods.len();
    let buyer_local: BTreeMap<usize, usize> =
        buyers.iter().enumerate().map(|(l, &b)| (b, l)).collect();
    let good_local: BTreeMap<usize, usize> =
        goods.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let s = bn + gn;
    let t = bn + gn + 1;
    let mut rn = ResidualNet::new(bn + gn + 2);
    let caps: Vec<Rational> = buyers.iter().map(|&b| net.source_caps[b].clone()).collect();
    let inf = infinite_cap(&caps);
    for (l, cap) in caps.iter().enumerate() {
        rn.add_edge(s, l, cap.clone());
        rn.add_edge(l, t, lambda.clone());
    }
    for &g in goods {
        rn.add_edge(bn + good_local[&g], t, net.sink_caps[g].clone());
    }
    for &(b, g) in edges {
        rn.add_edge(buyer_local[&b], bn + good_local[&g], inf.clone());
    }
    let value = rn.augment_to_max(s, t);
    let excess = caps.iter().sum::<Rational>() - value;
    if excess.is_zero() {
        return (excess, Vec::new());
    }
    let reaches_t = rn.reaching(t);
    let dense: Vec<usize> = buyers
        .iter()
        .copied()
        .filter(|&b| !reaches_t[buyer_local[&b]])
        .collect();
    (excess, dense)
}

/// Forest specialization of the split test: maximize
/// `sum_{b in T} (cap_b - lambda) - sum_{g adjacent to T} cap_g` by a
/// two-state dynamic program over each tree (buyer selected or not, good
/// paid or not; a selected buyer forces all its goods paid).
fn forest_split(
    net: &EqualityNetwork,
    buyers: &[usize],
    goods: &[usize],
    edges: &[(usize, usize)],
    lambda: &Rational,
) -> (Rational, Vec<usize>) {
    let bn = buyers.len();
    let gn = goods.len();
    let buyer_local: BTreeMap<usize, usize> =
        buyers.iter().enumerate().map(|(l, &b)| (b, l)).collect();
    let good_local: BTreeMap<usize, usize> =
        goods.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let vcount = bn + gn;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); vcount];
    for &(b, g) in edges {
        let u = buyer_local[&b];
        let w = bn + good_local[&g];
        adj[u].push(w);
        adj[w].push(u);
    }
    // Node value per state: state 1 is "selected" for buyers (gain
    // cap - lambda) and "paid" for goods (cost cap).
    let value_of = |v: usize, state: usize| -> Rational {
        if state == 0 {
            Rational::zero()
        } else if v < bn {
            &net.source_caps[buyers[v]] - lambda
        } else {
            -net.sink_caps[goods[v - bn]].clone()
        }
    };

    let mut dp0 = vec![Rational::zero(); vcount];
    let mut dp1 = vec![Rational::zero(); vcount];
    let mut parent_of = vec![usize::MAX; vcount];
    let mut visited = vec![false; vcount];
    let mut excess = Rational::zero();
    let mut dense = Vec::new();

    for root in 0..vcount {
        if visited[root] {
            continue;
        }
        // Iterative post-order.
        let mut order = Vec::new();
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent_of[w] = v;
                    stack.push(w);
                }
            }
        }
        for &v in order.iter().rev() {
            let mut d0 = value_of(v, 0);
            let mut d1 = value_of(v, 1);
            let v_is_buyer = v < bn;
            for &w in &adj[v] {
                if parent_of[w] != v {
                    continue;
                }
                // Edge between buyer and good: (selected, unpaid) is the
                // only forbidden combination.
                let (free, forced) = (dp0[w].clone().max(dp1[w].clone()), ());
                let _ = forced;
                if v_is_buyer {
                    d1 += &dp1[w];
                    d0 += &free;
                } else {
                    d0 += &dp0[w];
                    d1 += &free;
                }
            }
            dp0[v] = d0;
            dp1[v] = d1;
        }
        let root_state = if dp1[root] > dp0[root] { 1 } else { 0 };
        let best = if root_state == 1 { dp1[root].clone() } else { dp0[root].clone() };
        excess += &best;
        // Reconstruct the maximizer for this tree.
        let mut rec = vec![(root, root_state)];
        while let Some((v, state)) = rec.pop() {
            if v < bn && state == 1 {
                dense.push(buyers[v]);
            }
            let v_is_buyer = v < bn;
            for &w in &adj[v] {
                if parent_of[w] != v {
                    continue;
                }
                let child_state = if v_is_buyer {
                    if state == 1 {
                        1
                    } else if dp1[w] > dp0[w] {
                        1
                    } else {
                        0
                    }
                } else if state == 0 {
                    0
                } else if dp1[w] > dp0[w] {
                    1
                } else {
                    0
                };
                rec.push((w, child_state));
            }
        }
    }
    if excess.is_zero() {
        return (excess, Vec::new());
    }
    dense.sort_unstable();
    (excess, dense)
}

/// Materialize the flow of a block whose buyers all sit at surplus
/// `lambda`: route `cap_b - lambda` from every buyer.
fn construct_uniform(
    net: &EqualityNetwork,
    buyers: &[usize],
    goods: &[usize],
    edges: &[(usize, usize)],
    lambda: &Rational,
    forest_mode: bool,
    out: &mut BTreeMap<(usize, usize), Rational>,
) -> SolverResult<()> {
    let mut supplies = Vec::with_capacity(buyers.len());
    for &b in buyers {
        let s = &net.source_caps[b] - lambda;
        if s.is_negative() {
            return Err(SolverError::InvariantViolation(
                "uniform block contains a buyer below the common level".into(),
            ));
        }
        supplies.push(s);
    }
    let mut demands: Vec<Rational> = goods.iter().map(|&g| net.sink_caps[g].clone()).collect();
    let target: Rational = supplies.iter().sum();
    let local_edges: Vec<(usize, usize)> = {
        let buyer_local: BTreeMap<usize, usize> =
            buyers.iter().enumerate().map(|(l, &b)| (b, l)).collect();
        let good_local: BTreeMap<usize, usize> =
            goods.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        edges
            .iter()
            .map(|&(b, g)| (buyer_local[&b], good_local[&g]))
            .collect()
    };

    let flows: BTreeMap<(usize, usize), Rational> = if forest_mode {
        let mut s = supplies.clone();
        let mut d = demands.clone();
        let f = peel_forest_flow(&local_edges, &mut s, &mut d)?;
        demands = d;
        f
    } else {
        let bn = buyers.len();
        let gn = goods.len();
        let s_node = bn + gn;
        let t_node = bn + gn + 1;
        let mut rn = ResidualNet::new(bn + gn + 2);
        let inf = infinite_cap(&supplies);
        for (l, cap) in supplies.iter().enumerate() {
            rn.add_edge(s_node, l, cap.clone());
        }
        for (l, cap) in demands.iter().enumerate() {
            rn.add_edge(bn + l, t_node, cap.clone());
        }
        let mut edge_idx = Vec::new();
        for &(b, g) in &local_edges {
            edge_idx.push(((b, g), rn.add_edge(b, bn + g, inf.clone())));
        }
        let value = rn.augment_to_max(s_node, t_node);
        if value != target {
            return Err(SolverError::InvariantViolation(
                "uniform block flow does not saturate its sources".into(),
            ));
        }
        let mut f = BTreeMap::new();
        for ((b, g), idx) in edge_idx {
            let fv = rn.flow_on(idx);
            if !fv.is_zero() {
                f.insert((b, g), fv);
            }
        }
        for ((_, g), fv) in &f {
            demands[*g] -= fv;
        }
        f
    };

    let routed: Rational = flows.values().sum();
    if routed != target {
        return Err(SolverError::InvariantViolation(
            "uniform block flow does not saturate its sources".into(),
        ));
    }
    // At a positive level the block is tight, so every good reachable from
    // its buyers sells out exactly. Goods with no edge into the block can
    // stay unsold.
    if lambda.is_positive() {
        let mut adjacent = vec![false; goods.len()];
        for &(_, lg) in &local_edges {
            adjacent[lg] = true;
        }
        if demands
            .iter()
            .enumerate()
            .any(|(lg, d)| adjacent[lg] && !d.is_zero())
        {
            return Err(SolverError::InvariantViolation(
                "positive-level block left a reachable good unsold".into(),
            ));
        }
    }
    for ((lb, lg), f) in flows {
        out.insert((buyers[lb], goods[lg]), f);
    }
    Ok(())
}

/// Balanced flow that keeps every good of `keep_sold` completely sold.
pub(crate) fn solve_preserving(
    net: &EqualityNetwork,
    keep_sold: &BTreeSet<usize>,
    start: Option<&FlowState>,
    forest_mode: bool,
) -> SolverResult<FlowState> {
    if !keep_sold.is_empty() {
        let start = start.ok_or_else(|| {
            SolverError::InvariantViolation(
                "preserving sold goods requires a witness start flow".into(),
            )
        })?;
        let checked = FlowState::from_flows(net, start.flows.clone())?;
        for &g in keep_sold {
            if !checked.is_sold(g) {
                return Err(SolverError::StartMissesSoldGood(g));
            }
        }
    }

    let balanced = solve_balanced(net, forest_mode)?;
    if keep_sold.iter().all(|&g| balanced.is_sold(g)) {
        return Ok(balanced);
    }

    // Reroute the zero-surplus part so the missing goods get sold. The
    // positive-surplus blocks keep their flows; since the start flow proves
    // a maximum flow selling `keep_sold` exists, that flow saturates the
    // cut around the positive part and spends the zero-surplus buyers in
    // full on the remaining goods, with the preserved goods exactly full.
    let n = net.n;
    let zero_buyers: Vec<usize> = (0..n)
        .filter(|&b| balanced.buyer_surplus[b].is_zero())
        .collect();
    let positive: BTreeSet<usize> = (0..n)
        .filter(|&b| !balanced.buyer_surplus[b].is_zero())
        .collect();
    let mut prime_goods: BTreeSet<usize> = BTreeSet::new();
    for (&(b, g), f) in &balanced.flows {
        if positive.contains(&b) && f.is_positive() {
            prime_goods.insert(g);
        }
    }
    let rest_goods: Vec<usize> = (0..n).filter(|g| !prime_goods.contains(g)).collect();
    let bottom_total: Rational = zero_buyers
        .iter()
        .map(|&b| net.source_caps[b].clone())
        .sum();
    let preserved_total: Rational = rest_goods
        .iter()
        .filter(|g| keep_sold.contains(g))
        .map(|&g| net.sink_caps[g].clone())
        .sum();
    if preserved_total > bottom_total {
        return Err(SolverError::InvariantViolation(
            "sold-set-preserving reroute is infeasible for the given start flow".into(),
        ));
    }

    // Auxiliary network: preserved goods drain straight to the sink, the
    // others share a bottleneck of capacity (bottom value - preserved caps),
    // which forces every preserved good to fill.
    let bn = zero_buyers.len();
    let gn = rest_goods.len();
    let s_node = bn + gn + 1; // t' sits at bn+gn
    let t_node = bn + gn + 2;
    let t_prime = bn + gn;
    let mut rn = ResidualNet::new(bn + gn + 3);
    let caps: Vec<Rational> = zero_buyers.iter().map(|&b| net.source_caps[b].clone()).collect();
    let inf = infinite_cap(&caps);
    for (l, cap) in caps.iter().enumerate() {
        rn.add_edge(s_node, l, cap.clone());
    }
    for (l, &g) in rest_goods.iter().enumerate() {
        if keep_sold.contains(&g) {
            rn.add_edge(bn + l, t_node, net.sink_caps[g].clone());
        } else {
            rn.add_edge(bn + l, t_prime, net.sink_caps[g].clone());
        }
    }
    rn.add_edge(t_prime, t_node, &bottom_total - &preserved_total);
    let buyer_local: BTreeMap<usize, usize> =
        zero_buyers.iter().enumerate().map(|(l, &b)| (b, l)).collect();
    let good_local: BTreeMap<usize, usize> =
        rest_goods.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let mut edge_idx = Vec::new();
    for &(b, g) in &net.edges {
        if buyer_local.contains_key(&b) && good_local.contains_key(&g) {
            edge_idx.push(((b, g), rn.add_edge(buyer_local[&b], bn + good_local[&g], inf.clone())));
        }
    }
    let value = rn.augment_to_max(s_node, t_node);
    if value != bottom_total {
        return Err(SolverError::InvariantViolation(
            "sold-set-preserving reroute could not spend the zero-surplus buyers".into(),
        ));
    }

    let mut flows: BTreeMap<(usize, usize), Rational> = balanced
        .flows
        .iter()
        .filter(|((b, _), _)| positive.contains(b))
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    for ((b, g), idx) in edge_idx {
        let f = rn.flow_on(idx);
        if !f.is_zero() {
            flows.insert((b, g), f);
        }
    }
    let result = FlowState::from_flows(net, flows)?;
    if result.buyer_surplus != balanced.buyer_surplus {
        return Err(SolverError::InvariantViolation(
            "sold-set-preserving reroute changed the surplus vector".into(),
        ));
    }
    for &g in keep_sold {
        if !result.is_sold(g) {
            return Err(SolverError::InvariantViolation(format!(
                "good {g} remained unsold after the preserving reroute"
            )));
        }
    }
    if !is_balanced(net, &result)? {
        return Err(SolverError::InvariantViolation(
            "preserving reroute failed the balancedness audit".into(),
        ));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{balanced_flow, balanced_flow_preserving, forest_balanced_flow};

    fn r(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn rs(vs: &[i64]) -> Vec<Rational> {
        vs.iter().map(|&v| r(v)).collect()
    }

    #[test]
    fn hand_example_surpluses_and_flows() {
        // Buyers (3,1), goods (1,1), edges b0->{c0,c1}, b1->{c0}.
        let net = EqualityNetwork::new(2, rs(&[3, 1]), rs(&[1, 1]), [(0, 0), (0, 1), (1, 0)]);
        let f = balanced_flow(&net).unwrap();
        assert_eq!(f.buyer_surplus, rs(&[1, 1]));
        assert_eq!(f.surplus_norm_squared(), r(2));
        assert_eq!(f.flow(0, 0), r(1));
        assert_eq!(f.flow(0, 1), r(1));
        assert_eq!(f.flow(1, 0), r(0));
    }

    #[test]
    fn perfect_matching_has_zero_surpluses() {
        let net = EqualityNetwork::new(3, rs(&[1, 1, 1]), rs(&[1, 1, 1]), [(0, 0), (1, 1), (2, 2)]);
        let f = balanced_flow(&net).unwrap();
        assert!(f.buyer_surplus.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn distinct_levels_are_separated() {
        // Buyer 0 can only reach good 0 (cap 1) with budget 10; buyer 1 has
        // its own good. Levels must be 9 and 0, not blended.
        let net = EqualityNetwork::new(2, rs(&[10, 2]), rs(&[1, 9]), [(0, 0), (1, 1)]);
        let f = balanced_flow(&net).unwrap();
        assert_eq!(f.buyer_surplus, rs(&[9, 0]));
    }

    #[test]
    fn shared_good_with_private_outlet() {
        // Buyers (10, 2) both reach good 0 (cap 9); buyer 1 also reaches
        // good 1 (cap 9). Balanced levels: buyer 0 sells as much as possible.
        let net = EqualityNetwork::new(2, rs(&[10, 2]), rs(&[9, 9]), [(0, 0), (1, 0), (1, 1)]);
        let f = balanced_flow(&net).unwrap();
        assert_eq!(f.buyer_surplus, rs(&[1, 0]));
        assert_eq!(f.flow(0, 0), r(9));
    }

    #[test]
    fn preserving_with_empty_set_matches_plain_balanced() {
        let net = EqualityNetwork::new(2, rs(&[3, 1]), rs(&[1, 1]), [(0, 0), (0, 1), (1, 0)]);
        let plain = balanced_flow(&net).unwrap();
        let f0 = max_flow(&net, None).unwrap();
        let preserved = balanced_flow_preserving(&net, &BTreeSet::new(), &f0).unwrap();
        assert_eq!(plain.buyer_surplus, preserved.buyer_surplus);
    }

    #[test]
    fn preserving_is_idempotent_on_its_own_output() {
        let net = EqualityNetwork::new(2, rs(&[3, 1]), rs(&[1, 1]), [(0, 0), (0, 1), (1, 0)]);
        let f = balanced_flow(&net).unwrap();
        let sold = f.sold_goods();
        let again = balanced_flow_preserving(&net, &sold, &f).unwrap();
        for g in sold {
            assert!(again.is_sold(g));
        }
        assert_eq!(again.buyer_surplus, f.buyer_surplus);
    }

    #[test]
    fn preserving_keeps_a_good_plain_balancing_may_drop() {
        // Three zero-surplus buyers, goods (2,1,1): which good stays
        // partially unsold is a free choice for a plain balanced flow, so
        // ask the preserving variant to pin good 1.
        let edges = [(0, 0), (1, 0), (1, 1), (2, 0), (2, 2)];
        let net = EqualityNetwork::new(3, rs(&[1, 1, 1]), rs(&[2, 1, 1]), edges);
        let mut start_flows = BTreeMap::new();
        start_flows.insert((0, 0), r(1));
        start_flows.insert((1, 1), r(1));
        start_flows.insert((2, 2), r(1));
        let start = FlowState::from_flows(&net, start_flows).unwrap();
        assert!(start.is_sold(1) && start.is_sold(2));
        let keep: BTreeSet<usize> = [1, 2].into_iter().collect();
        let f = balanced_flow_preserving(&net, &keep, &start).unwrap();
        assert!(f.is_sold(1) && f.is_sold(2));
        assert!(f.buyer_surplus.iter().all(|s| s.is_zero()));
        // Norm is minimal among flows selling the kept goods: everything is
        // zero, which no flow can beat.
        assert_eq!(f.surplus_norm_squared(), r(0));
    }

    #[test]
    fn preserving_rejects_start_that_misses_a_good() {
        let net = EqualityNetwork::new(2, rs(&[1, 1]), rs(&[1, 1]), [(0, 0), (1, 0), (1, 1)]);
        let start = FlowState::from_flows(&net, BTreeMap::new()).unwrap();
        let keep: BTreeSet<usize> = [1].into_iter().collect();
        assert!(matches!(
            balanced_flow_preserving(&net, &keep, &start),
            Err(SolverError::StartMissesSoldGood(1))
        ));
    }

    #[test]
    fn forest_variant_matches_generic_on_forests() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..100 {
            let n = rng.gen_range(1..=7);
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for b in 0..n {
                for g in 0..n {
                    if rng.gen_bool(0.35) {
                        let mut cand = edges.clone();
                        cand.push((b, g));
                        if super::super::is_forest(n, &cand) {
                            edges = cand;
                        }
                    }
                }
            }
            let source: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(0..7))).collect();
            let sink: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(0..7))).collect();
            let net = EqualityNetwork::new(n, source, sink, edges);
            let start = super::super::forest_max_flow(&net).unwrap();
            let sold = start.sold_goods();
            let generic = balanced_flow_preserving(&net, &sold, &start).unwrap();
            let forest = forest_balanced_flow(&net, &sold, Some(&start)).unwrap();
            assert_eq!(generic.buyer_surplus, forest.buyer_surplus);
            for &g in &sold {
                assert!(forest.is_sold(g));
            }
        }
    }

    #[test]
    fn chain_network_forest_equals_generic() {
        // b0-c0, b0-c1, b1-c1 with buyer caps (2,1), good caps (2,3).
        let net = EqualityNetwork::new(2, rs(&[2, 1]), rs(&[2, 3]), [(0, 0), (0, 1), (1, 1)]);
        let start = super::super::forest_max_flow(&net).unwrap();
        let sold = start.sold_goods();
        let generic = balanced_flow_preserving(&net, &sold, &start).unwrap();
        let forest = forest_balanced_flow(&net, &sold, Some(&start)).unwrap();
        assert_eq!(generic.buyer_surplus, forest.buyer_surplus);
    }

    #[test]
    fn balanced_norm_never_exceeds_other_max_flows() {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(2..=5);
            let mut edges = Vec::new();
            for b in 0..n {
                for g in 0..n {
                    if rng.gen_bool(0.5) {
                        edges.push((b, g));
                    }
                }
            }
            let source: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(1..6))).collect();
            let sink: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(1..6))).collect();
            let net = EqualityNetwork::new(n, source, sink, edges.clone());
            let bal = balanced_flow(&net).unwrap();
            // Random augmentation orders give other maximum flows.
            edges.shuffle(&mut rng);
            let other = max_flow(&net, None).unwrap();
            assert_eq!(other.value, bal.value);
            assert!(bal.surplus_norm_squared() <= other.surplus_norm_squared());
        }
    }

    #[test]
    fn relabeling_equivariance() {
        let net = EqualityNetwork::new(3, rs(&[5, 2, 3]), rs(&[2, 2, 4]), [
            (0, 0),
            (0, 2),
            (1, 2),
            (2, 1),
            (2, 2),
        ]);
        let f = balanced_flow(&net).unwrap();
        // Swap buyers 0 and 2 (and their goods' roles stay put).
        let perm = [2usize, 1, 0];
        let edges: Vec<(usize, usize)> = net.edges.iter().map(|&(b, g)| (perm[b], g)).collect();
        let source = vec![net.source_caps[2].clone(), net.source_caps[1].clone(), net.source_caps[0].clone()];
        let net2 = EqualityNetwork::new(3, source, net.sink_caps.clone(), edges);
        let f2 = balanced_flow(&net2).unwrap();
        for b in 0..3 {
            assert_eq!(f.buyer_surplus[b], f2.buyer_surplus[perm[b]]);
        }
    }
}
