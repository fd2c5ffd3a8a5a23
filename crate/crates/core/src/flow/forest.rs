use std::collections::BTreeMap;

use num::Zero;

use crate::error::{SolverError, SolverResult};
use crate::exactnum::Rational;

/// Whether a set of `(buyer, good)` edges over `n` buyers and `n` goods is
/// acyclic.
pub fn is_forest(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut Vec<usize>, v: usize) -> usize {
        if parent[v] != v {
            let root = find(parent, parent[v]);
            parent[v] = root;
        }
        parent[v]
    }
    for &(b, g) in edges {
        let rb = find(&mut parent, b);
        let rg = find(&mut parent, n + g);
        if rb == rg {
            return false;
        }
        parent[rb] = rg;
    }
    true
}

/// Maximum flow on a forest-structured bipartite network by leaf peeling:
/// repeatedly pick the lowest-index degree-one endpoint (buyers before
/// goods), route the bottleneck along its unique edge, and delete the edge.
///
/// `supplies` and `demands` are the residual source and sink capacities;
/// they are consumed in place by the caller's clone. Returns the bipartite
/// flows. Errors when the edges contain a cycle.
pub(crate) fn peel_forest_flow(
    edges: &[(usize, usize)],
    supplies: &mut [Rational],
    demands: &mut [Rational],
) -> SolverResult<BTreeMap<(usize, usize), Rational>> {
    let bn = supplies.len();
    let gn = demands.len();
    let mut degree_b = vec![0usize; bn];
    let mut degree_g = vec![0usize; gn];
    let mut alive: Vec<bool> = vec![true; edges.len()];
    let mut incident_b: Vec<Vec<usize>> = vec![Vec::new(); bn];
    let mut incident_g: Vec<Vec<usize>> = vec![Vec::new(); gn];
    for (idx, &(b, g)) in edges.iter().enumerate() {
        degree_b[b] += 1;
        degree_g[g] += 1;
        incident_b[b].push(idx);
        incident_g[g].push(idx);
    }

    let mut flows = BTreeMap::new();
    let mut remaining = edges.len();
    while remaining > 0 {
        // Lowest-index degree-one endpoint, buyers first.
        let pick_buyer = (0..bn).find(|&b| degree_b[b] == 1);
        let edge_idx = match pick_buyer {
            Some(b) => incident_b[b].iter().copied().find(|&e| alive[e]).unwrap(),
            None => {
                let g = (0..gn)
                    .find(|&g| degree_g[g] == 1)
                    .ok_or(SolverError::ForestCycle)?;
                incident_g[g].iter().copied().find(|&e| alive[e]).unwrap()
            }
        };
        let (b, g) = edges[edge_idx];
        let q = supplies[b].clone().min(demands[g].clone());
        if !q.is_zero() {
            *flows.entry((b, g)).or_insert_with(Rational::zero) += &q;
            supplies[b] -= &q;
            demands[g] -= &q;
        }
        alive[edge_idx] = false;
        degree_b[b] -= 1;
        degree_g[g] -= 1;
        remaining -= 1;
    }
    Ok(flows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn r(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    #[test]
    fn forest_detection() {
        assert!(is_forest(2, &[(0, 0), (0, 1), (1, 1)]));
        assert!(!is_forest(2, &[(0, 0), (0, 1), (1, 0), (1, 1)]));
        assert!(is_forest(3, &[]));
    }

    #[test]
    fn peel_single_path() {
        let mut s = vec![r(2)];
        let mut d = vec![r(1)];
        let flows = peel_forest_flow(&[(0, 0)], &mut s, &mut d).unwrap();
        assert_eq!(flows[&(0, 0)], r(1));
        assert_eq!(s[0], r(1));
    }

    #[test]
    fn peel_star() {
        let mut s = vec![r(3), Rational::zero()];
        let mut d = vec![r(1), r(1)];
        let flows = peel_forest_flow(&[(0, 0), (0, 1)], &mut s, &mut d).unwrap();
        assert_eq!(flows[&(0, 0)], Rational::one());
        assert_eq!(flows[&(0, 1)], Rational::one());
        assert_eq!(s[0], r(1));
    }

    #[test]
    fn peel_rejects_cycles() {
        let mut s = vec![r(1), r(1)];
        let mut d = vec![r(1), r(1)];
        let err = peel_forest_flow(&[(0, 0), (0, 1), (1, 0), (1, 1)], &mut s, &mut d);
        assert!(matches!(err, Err(SolverError::ForestCycle)));
    }
}
