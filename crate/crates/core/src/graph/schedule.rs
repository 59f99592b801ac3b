use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Kahn's algorithm over `inputs[v]` (the predecessors of `v`). Ready nodes
/// are released in ascending index order, so the result is the unique
/// topological order that respects insertion order wherever the edges allow.
///
/// On failure returns the indices of one cycle, in edge order.
pub(crate) fn topological_order(inputs: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = inputs.len();
    let mut indegree = vec![0usize; n];
    let mut successors = vec![Vec::new(); n];
    for (v, preds) in inputs.iter().enumerate() {
        for &u in preds {
            successors[u].push(v);
            indegree[v] += 1;
        }
    }

    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &successors[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.push(Reverse(v));
            }
        }
    }

    if order.len() == n {
        Ok(order)
    } else {
        Err(find_cycle(inputs, &indegree))
    }
}

/// Every node left with a nonzero indegree has a predecessor that is also
/// left, so walking predecessors from any of them must revisit a node.
fn find_cycle(inputs: &[Vec<usize>], indegree: &[usize]) -> Vec<usize> {
    let start = indegree.iter().position(|&d| d > 0).unwrap_or(0);
    let mut seen = vec![usize::MAX; inputs.len()];
    let mut path = Vec::new();
    let mut v = start;
    while seen[v] == usize::MAX {
        seen[v] = path.len();
        path.push(v);
        v = match inputs[v].iter().copied().find(|&u| indegree[u] > 0) {
            Some(u) => u,
            None => break,
        };
    }
    let mut cycle = path.split_off(seen[v].min(path.len()));
    // path follows predecessor links; report in edge direction.
    cycle.reverse();
    cycle
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_diamond() {
        assert_eq!(topological_order(&[vec![], vec![0], vec![1]]).unwrap(), vec![0, 1, 2]);
        assert_eq!(
            topological_order(&[vec![], vec![0], vec![0], vec![1, 2]]).unwrap(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn ties_follow_insertion_order_even_against_late_edges() {
        // 0 depends on 2: 1 and 2 are both ready first, 1 wins the tie.
        assert_eq!(topological_order(&[vec![2], vec![], vec![]]).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn two_cycle_is_reported() {
        let cycle = topological_order(&[vec![1], vec![0]]).unwrap_err();
        let mut sorted = cycle.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1]);
    }

    #[test]
    fn cycle_behind_a_tail_excludes_the_tail() {
        // 3 -> 1 -> 2 -> 1, plus 0 standalone
        let inputs = vec![vec![], vec![2, 3], vec![1], vec![]];
        let mut cycle = topological_order(&inputs).unwrap_err();
        cycle.sort();
        assert_eq!(cycle, vec![1, 2]);
    }
}
