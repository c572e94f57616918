//! Brute-force transitive closure over parent lists.

use std::collections::BTreeSet;

use rand::Rng;

/// Random DAG with `nodes` vertices where every parent index is strictly smaller
/// than its child index, so registering in index order never forward-references.
pub fn random_dag<R: Rng>(rng: &mut R, nodes: usize, edge_probability: f64) -> Vec<Vec<usize>> {
    (0..nodes)
        .map(|child| {
            (0..child)
                .filter(|_| rng.random_bool(edge_probability))
                .collect()
        })
        .collect()
}

/// Fixed-point iteration: keep adding parents of everything reached until
/// nothing changes. Quadratic and proud of it.
pub fn ancestors_or_self(parents: &[Vec<usize>], start: usize) -> BTreeSet<usize> {
    let mut reached = BTreeSet::from([start]);
    loop {
        let before = reached.len();
        let snapshot: Vec<usize> = reached.iter().copied().collect();
        for node in snapshot {
            reached.extend(parents[node].iter().copied());
        }
        if reached.len() == before {
            return reached;
        }
    }
}

/// True if some node reaches itself through at least one parent link.
pub fn has_cycle(parents: &[Vec<usize>]) -> bool {
    (0..parents.len()).any(|n| {
        parents[n]
            .iter()
            .any(|&p| ancestors_or_self(parents, p).contains(&n))
    })
}
