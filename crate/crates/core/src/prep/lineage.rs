use std::collections::HashMap;

use crate::data::LineageGraph;
use crate::error::{Error, Result};

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Connected components of the lineage graph over `all_ids`.
///
/// Components are ordered by their first member in `all_ids`, and members keep
/// `all_ids` order. Isolated ids form singletons.
pub fn lineage_components(graph: &LineageGraph, all_ids: &[String]) -> Result<Vec<Vec<String>>> {
    let index: HashMap<&str, usize> = all_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    if index.len() != all_ids.len() {
        let mut seen = std::collections::HashSet::new();
        let dup = all_ids.iter().find(|id| !seen.insert(id.as_str())).unwrap();
        return Err(Error::Duplicate {
            kind: "sequence",
            id: dup.clone(),
        });
    }
    let mut sets = DisjointSet::new(all_ids.len());
    for (a, b) in graph.edges() {
        let lookup = |end: &String| {
            index
                .get(end.as_str())
                .copied()
                .ok_or_else(|| Error::DanglingEndpoint {
                    a: a.clone(),
                    b: b.clone(),
                    missing: end.clone(),
                })
        };
        let (ia, ib) = (lookup(a)?, lookup(b)?);
        sets.union(ia, ib);
    }
    let mut slot_of_root: HashMap<usize, usize> = HashMap::new();
    let mut components: Vec<Vec<String>> = Vec::new();
    for (i, id) in all_ids.iter().enumerate() {
        let root = sets.find(i);
        let slot = *slot_of_root.entry(root).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[slot].push(id.clone());
    }
    Ok(components)
}
