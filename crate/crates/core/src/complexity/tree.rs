use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn from_bit(bit: u64) -> Self {
        if bit & 1 == 1 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Sign path of length `n` whose `t`-th sign is bit `t` of `mask`.
    pub fn path_from_mask(mask: u64, n: usize) -> Vec<Sign> {
        (0..n).map(|t| Sign::from_bit(mask >> t)).collect()
    }

    pub fn path_to_mask(path: &[Sign]) -> u64 {
        path.iter()
            .enumerate()
            .map(|(t, s)| u64::from(*s == Sign::Plus) << t)
            .sum()
    }

    fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }
}

/// Complete binary tree of depth `n`; the node at level `t` is addressed by
/// the sign prefix `eps_{1:t-1}`.
///
/// Nodes are stored in heap order: the root is node 0 and the children of
/// node `i` are `2i + 1` (after `-`) and `2i + 2` (after `+`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTree<L> {
    depth: usize,
    nodes: Vec<L>,
}

fn node_count(depth: usize) -> usize {
    (1usize << depth) - 1
}

fn child(index: usize, sign: Sign) -> usize {
    2 * index + 1 + usize::from(sign == Sign::Plus)
}

impl<L> SignTree<L> {
    pub fn from_nodes(depth: usize, nodes: Vec<L>) -> Result<Self> {
        if depth == 0 || depth > 30 {
            return Err(Error::invalid("tree depth must lie in 1..=30"));
        }
        if nodes.len() != node_count(depth) {
            return Err(Error::invalid(format!(
                "depth {depth} tree needs {} nodes, got {}",
                node_count(depth),
                nodes.len()
            )));
        }
        Ok(SignTree { depth, nodes })
    }

    /// Builds the tree from a labelling of sign prefixes.
    pub fn from_fn(depth: usize, mut label: impl FnMut(&[Sign]) -> L) -> Result<Self> {
        if depth == 0 || depth > 30 {
            return Err(Error::invalid("tree depth must lie in 1..=30"));
        }
        let mut nodes = Vec::with_capacity(node_count(depth));
        for level in 0..depth {
            for bits in 0..1u64 << level {
                // heap order within a level reads the prefix most-significant-first
                let prefix: Vec<Sign> = (0..level)
                    .map(|t| Sign::from_bit(bits >> (level - 1 - t)))
                    .collect();
                nodes.push(label(&prefix));
            }
        }
        Ok(SignTree { depth, nodes })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn nodes(&self) -> &[L] {
        &self.nodes
    }

    pub fn label(&self, prefix: &[Sign]) -> &L {
        assert!(prefix.len() < self.depth, "prefix longer than the tree");
        let i = prefix.iter().fold(0, |i, &s| child(i, s));
        &self.nodes[i]
    }

    /// Labels `x_1, x_2(eps_1), ..., x_n(eps_{1:n-1})` met along a full sign path.
    pub fn along<'a>(&'a self, path: &'a [Sign]) -> impl Iterator<Item = &'a L> + 'a {
        let mut i = 0;
        (0..self.depth).map(move |t| {
            let here = i;
            if t + 1 < self.depth {
                i = child(i, path[t]);
            }
            &self.nodes[here]
        })
    }

    pub fn map<M>(&self, f: impl FnMut(&L) -> M) -> SignTree<M> {
        SignTree {
            depth: self.depth,
            nodes: self.nodes.iter().map(f).collect(),
        }
    }
}

impl<L: Clone> SignTree<L> {
    pub fn constant(depth: usize, label: L) -> Result<Self> {
        SignTree::from_fn(depth, |_| label.clone())
    }

    /// Map from sign-path strings (`""`, `"+"`, `"-+"`, ...) to labels.
    pub fn to_path_map(&self) -> BTreeMap<String, L> {
        let mut out = BTreeMap::new();
        for level in 0..self.depth {
            for bits in 0..1u64 << level {
                let prefix: Vec<Sign> = (0..level)
                    .map(|t| Sign::from_bit(bits >> (level - 1 - t)))
                    .collect();
                let key: String = prefix.iter().map(|s| s.symbol()).collect();
                out.insert(key, self.label(&prefix).clone());
            }
        }
        out
    }

    pub fn from_path_map<'a>(map: impl IntoIterator<Item = (&'a String, &'a L)>) -> Result<Self>
    where
        L: 'a,
    {
        let mut by_key = BTreeMap::new();
        let mut depth = 0;
        for (k, v) in map {
            if k.chars().any(|c| c != '+' && c != '-') {
                return Err(Error::invalid(format!("bad sign path {k:?}")));
            }
            depth = depth.max(k.len() + 1);
            by_key.insert(k.clone(), v.clone());
        }
        let mut missing = None;
        let tree = SignTree::from_fn(depth, |prefix| {
            let key: String = prefix.iter().map(|s| s.symbol()).collect();
            match by_key.get(&key) {
                Some(v) => Some(v.clone()),
                None => {
                    missing.get_or_insert(key);
                    None
                }
            }
        })?;
        if let Some(key) = missing {
            return Err(Error::invalid(format!("tree is missing sign path {key:?}")));
        }
        if by_key.len() != node_count(depth) {
            return Err(Error::invalid("tree has labels outside a complete tree"));
        }
        Ok(tree.map(|v| v.clone().expect("all nodes present")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_addressing_matches_from_fn() {
        let t = SignTree::from_fn(3, |p| Sign::path_to_mask(p) * 10 + p.len() as u64).unwrap();
        assert_eq!(*t.label(&[]), 0);
        assert_eq!(*t.label(&[Sign::Plus]), 11);
        assert_eq!(*t.label(&[Sign::Minus, Sign::Plus]), 22);
        let path = [Sign::Plus, Sign::Minus, Sign::Plus];
        let seen: Vec<u64> = t.along(&path).copied().collect();
        assert_eq!(seen, vec![0, 11, 12]);
    }

    #[test]
    fn path_map_round_trip() {
        let t = SignTree::from_fn(3, |p| p.len() as i32 - Sign::path_to_mask(p) as i32).unwrap();
        let map = t.to_path_map();
        assert_eq!(map.len(), 7);
        assert!(map.contains_key("") && map.contains_key("+-"));
        let back = SignTree::from_path_map(&map).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn incomplete_path_map_rejected() {
        let mut map = BTreeMap::new();
        map.insert(String::new(), 0usize);
        map.insert("+".to_string(), 1);
        assert!(SignTree::from_path_map(&map).is_err());
    }
}
