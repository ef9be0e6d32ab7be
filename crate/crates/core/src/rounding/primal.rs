use crate::error::SolveError;
use crate::model::{FactorCosts, Graph, Labeling};
use crate::rounding::order::NodeOrder;

/// Sequential rounding: visit nodes in `order`, giving each the label that
/// minimizes its unary cost plus pairwise costs to already labeled
/// neighbors. Ties go to the smallest label.
pub fn primal_round(
    graph: &Graph,
    label_counts: &[usize],
    potentials: &FactorCosts,
    order: &NodeOrder,
) -> Result<Labeling, SolveError> {
    let n = graph.node_count();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for &i in order.as_slice() {
        let mut best = (f64::INFINITY, None);
        for x in 0..label_counts[i] {
            let mut c = potentials.unary[i][x];
            for &(j, e) in graph.neighbors(i) {
                if let Some(xj) = labels[j] {
                    c += if i < j {
                        potentials.pairwise[e][x * label_counts[j] + xj]
                    } else {
                        potentials.pairwise[e][xj * label_counts[i] + x]
                    };
                }
            }
            if c < best.0 {
                best = (c, Some(x));
            }
        }
        labels[i] = Some(best.1.ok_or(SolveError::RoundingFailed(i))?);
    }
    Ok(Labeling(
        labels
            .into_iter()
            .map(|l| l.expect("every node visited"))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_and_failure() {
        let g = Graph::new(1, &[]).unwrap();
        let pot = FactorCosts {
            unary: vec![vec![2.0, 0.5, 0.5]],
            pairwise: vec![],
        };
        let order = NodeOrder::row_major(1);
        assert_eq!(
            primal_round(&g, &[3], &pot, &order).unwrap(),
            Labeling(vec![1])
        );
        let dead = FactorCosts {
            unary: vec![vec![f64::INFINITY; 3]],
            pairwise: vec![],
        };
        assert_eq!(
            primal_round(&g, &[3], &dead, &order),
            Err(SolveError::RoundingFailed(0))
        );
    }

    #[test]
    fn respects_labeled_neighbors() {
        let g = Graph::path(2).unwrap();
        let pot = FactorCosts {
            unary: vec![vec![0.0, 1.0], vec![0.0, 0.5]],
            pairwise: vec![vec![5.0, 0.0, 0.0, 5.0]],
        };
        let fwd = primal_round(&g, &[2, 2], &pot, &NodeOrder::row_major(2)).unwrap();
        assert_eq!(fwd, Labeling(vec![0, 1]));
        let back =
            primal_round(&g, &[2, 2], &pot, &NodeOrder::new(vec![1, 0], 2).unwrap()).unwrap();
        assert_eq!(back, Labeling(vec![1, 0]));
    }
}
