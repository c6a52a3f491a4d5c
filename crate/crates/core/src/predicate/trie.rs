use std::collections::BTreeMap;

/// Character trie over distinct cell values; each node counts how many
/// distinct values pass through it.
#[derive(Debug, Default)]
pub struct PrefixTrie {
    root: Node,
}

#[derive(Debug, Default)]
struct Node {
    count: usize,
    children: BTreeMap<char, Node>,
}

impl PrefixTrie {
    pub fn new() -> Self {
        PrefixTrie::default()
    }

    /// Callers insert each distinct value once.
    pub fn insert(&mut self, value: &str) {
        let mut node = &mut self.root;
        node.count += 1;
        for c in value.chars() {
            node = node.children.entry(c).or_default();
            node.count += 1;
        }
    }

    /// Number of inserted values starting with `prefix`.
    pub fn count(&self, prefix: &str) -> usize {
        let mut node = &self.root;
        for c in prefix.chars() {
            match node.children.get(&c) {
                Some(n) => node = n,
                None => return 0,
            }
        }
        node.count
    }

    /// All prefixes of at least `min_len` chars shared by at least
    /// `min_count` values, in lexicographic order.
    pub fn shared_prefixes(&self, min_len: usize, min_count: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut buf = String::new();
        walk(&self.root, &mut buf, 0, min_len, min_count, &mut out);
        out
    }
}

fn walk(node: &Node, buf: &mut String, depth: usize, min_len: usize, min_count: usize, out: &mut Vec<String>) {
    for (&c, child) in &node.children {
        if child.count < min_count {
            continue;
        }
        buf.push(c);
        if depth + 1 >= min_len {
            out.push(buf.clone());
        }
        walk(child, buf, depth + 1, min_len, min_count, out);
        buf.pop();
    }
}
