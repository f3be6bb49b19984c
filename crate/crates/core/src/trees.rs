//! Labeled trees, rooted trees with size-ordered children, star classification,
//! canonical forms, enumeration and random generation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Vertex id inside a tree, always in `0..n`.
pub type Vertex = u32;

pub const NO_VERTEX: Vertex = u32::MAX;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("vertex {0} has no children")]
    NoChildren(Vertex),
    #[error("parse error: {0}")]
    Parse(String),
}

/// An undirected tree on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    n: usize,
    adj: Vec<Vec<Vertex>>,
    edges: Vec<(Vertex, Vertex)>,
}

impl LabeledTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v as usize].len()
    }

    /// Edges normalized as `(min, max)`, sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u as usize].contains(&v)
    }
}

/// Builds a tree from an edge list, rejecting anything that is not a tree.
pub fn build_tree(n: usize, edges: &[(Vertex, Vertex)]) -> Result<LabeledTree, TreeError> {
    if n == 0 {
        return Err(TreeError::NotATree("empty vertex set".into()));
    }
    if edges.len() != n - 1 {
        return Err(TreeError::NotATree(format!(
            "expected {} edges, got {}",
            n - 1,
            edges.len()
        )));
    }
    let mut adj = vec![Vec::new(); n];
    let mut norm = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u as usize >= n || v as usize >= n {
            return Err(TreeError::NotATree(format!("edge ({u},{v}) out of range")));
        }
        if u == v {
            return Err(TreeError::NotATree(format!("self-loop at {u}")));
        }
        let (a, b) = (u.min(v), u.max(v));
        if adj[a as usize].contains(&b) {
            return Err(TreeError::NotATree(format!("duplicate edge ({a},{b})")));
        }
        adj[u as usize].push(v);
        adj[v as usize].push(u);
        norm.push((a, b));
    }
    // connectivity
    let mut seen = vec![false; n];
    let mut stack = vec![0u32];
    seen[0] = true;
    let mut cnt = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v as usize] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                cnt += 1;
                stack.push(w);
            }
        }
    }
    if cnt != n {
        return Err(TreeError::NotATree("disconnected".into()));
    }
    norm.sort_unstable();
    Ok(LabeledTree { n, adj, edges: norm })
}

/// A star contains a vertex of degree n-1. Trees on one or two vertices are stars.
pub fn is_star(t: &LabeledTree) -> bool {
    t.n <= 2 || (0..t.n as u32).any(|v| t.degree(v) == t.n - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarClass {
    CentralStar,
    DanglingStar,
    NonStar,
}

/// A tree rooted at `root`, children ordered larger-subtree-first with
/// deterministic tie-breaking (canonical code, then label).
#[derive(Debug, Clone)]
pub struct RootedTree {
    pub tree: LabeledTree,
    pub root: Vertex,
    pub parent: Vec<Vertex>,
    pub children: Vec<Vec<Vertex>>,
    pub subtree_size: Vec<u32>,
}

impl RootedTree {
    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn size(&self, v: Vertex) -> u32 {
        self.subtree_size[v as usize]
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v as usize]
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        let p = self.parent[v as usize];
        (p != NO_VERTEX).then_some(p)
    }

    /// Degree of `v` within the subtree rooted at `v`'s component, i.e. in the
    /// whole tree. Root degree equals its child count.
    pub fn degree(&self, v: Vertex) -> usize {
        self.tree.degree(v)
    }

    /// Vertices of the subtree rooted at `v`, preorder.
    pub fn subtree_vertices(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.size(v) as usize);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in &self.children[u as usize] {
                stack.push(c);
            }
        }
        out
    }

    /// True if every child of `v` is a leaf (so tr(v) is a star centered at v,
    /// counting singletons).
    pub fn subtree_is_central_star(&self, v: Vertex) -> bool {
        self.children[v as usize]
            .iter()
            .all(|&c| self.subtree_size[c as usize] == 1)
    }
}

/// Classifies the subtree rooted at `v`: a star rooted at a center is central,
/// a star rooted at a non-center leaf is dangling. Subtrees on one or two
/// vertices are central-stars.
pub fn classify_rooted_star(t: &RootedTree, v: Vertex) -> StarClass {
    let sz = t.size(v);
    if sz <= 2 {
        return StarClass::CentralStar;
    }
    if t.subtree_is_central_star(v) {
        return StarClass::CentralStar;
    }
    // dangling: v is a leaf within tr(v) (single child) and the child is
    // adjacent to everything below it
    let ch = t.children(v);
    if ch.len() == 1 && t.subtree_is_central_star(ch[0]) && t.size(ch[0]) == sz - 1 {
        return StarClass::DanglingStar;
    }
    StarClass::NonStar
}

/// Child that roots a smallest subtree of `v`: the last child in the
/// deterministic larger-subtree-first order.
pub fn min_subtree_child(t: &RootedTree, v: Vertex) -> Result<Vertex, TreeError> {
    t.children(v).last().copied().ok_or(TreeError::NoChildren(v))
}

fn rooted_code_at(t: &LabeledTree, root: Vertex) -> Vec<u8> {
    // AHU parenthesis encoding, children codes sorted.
    fn rec(t: &LabeledTree, v: Vertex, p: Vertex, out: &mut Vec<u8>) {
        let mut codes: Vec<Vec<u8>> = Vec::new();
        for &w in t.neighbors(v) {
            if w != p {
                let mut c = Vec::new();
                rec(t, w, v, &mut c);
                codes.push(c);
            }
        }
        codes.sort();
        out.push(b'(');
        for c in codes {
            out.extend_from_slice(&c);
        }
        out.push(b')');
    }
    let mut out = Vec::new();
    rec(t, root, NO_VERTEX, &mut out);
    out
}

fn centroids(t: &LabeledTree) -> Vec<Vertex> {
    let n = t.n();
    if n == 1 {
        return vec![0];
    }
    let mut size = vec![1u32; n];
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![NO_VERTEX; n];
    let mut stack = vec![0u32];
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in t.neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                parent[w as usize] = v;
                stack.push(w);
            }
        }
    }
    for &v in order.iter().rev() {
        if parent[v as usize] != NO_VERTEX {
            size[parent[v as usize] as usize] += size[v as usize];
        }
    }
    let half = n as u32 / 2;
    (0..n as u32)
        .filter(|&v| {
            let mut biggest = n as u32 - size[v as usize];
            for &w in t.neighbors(v) {
                if parent[w as usize] == v {
                    biggest = biggest.max(size[w as usize]);
                }
            }
            biggest <= half
        })
        .collect()
}

/// Canonical code of the unlabeled tree: equal codes iff isomorphic.
pub fn canonical_code(t: &LabeledTree) -> Vec<u8> {
    let cs = centroids(t);
    cs.iter().map(|&c| rooted_code_at(t, c)).min().unwrap()
}

/// Roots the tree and orders children by (subtree size desc, subtree canonical
/// code asc, label asc).
pub fn root_tree(t: &LabeledTree, root: Vertex) -> RootedTree {
    let n = t.n();
    assert!((root as usize) < n);
    let mut parent = vec![NO_VERTEX; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root as usize] = true;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in t.neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                parent[w as usize] = v;
                stack.push(w);
            }
        }
    }
    let mut size = vec![1u32; n];
    let mut code: Vec<Vec<u8>> = vec![Vec::new(); n];
    for &v in order.iter().rev() {
        let mut kid_codes: Vec<Vec<u8>> = t
            .neighbors(v)
            .iter()
            .filter(|&&w| parent[w as usize] == v)
            .map(|&w| std::mem::take(&mut code[w as usize]))
            .collect();
        kid_codes.sort();
        let mut c = Vec::with_capacity(2 + kid_codes.iter().map(Vec::len).sum::<usize>());
        c.push(b'(');
        for k in &kid_codes {
            c.extend_from_slice(k);
        }
        c.push(b')');
        for &w in t.neighbors(v) {
            if parent[w as usize] == v {
                size[v as usize] += size[w as usize];
            }
        }
        code[v as usize] = c;
    }
    // codes were consumed bottom-up; recompute per-child codes for ordering
    let mut code2: Vec<Vec<u8>> = vec![Vec::new(); n];
    for &v in order.iter().rev() {
        let mut kid_codes: Vec<&[u8]> = t
            .neighbors(v)
            .iter()
            .filter(|&&w| parent[w as usize] == v)
            .map(|&w| code2[w as usize].as_slice())
            .collect();
        kid_codes.sort();
        let mut c = Vec::with_capacity(2 + kid_codes.iter().map(|k| k.len()).sum::<usize>());
        c.push(b'(');
        for k in kid_codes {
            c.extend_from_slice(k);
        }
        c.push(b')');
        code2[v as usize] = c;
    }
    let mut children = vec![Vec::new(); n];
    for v in 0..n as u32 {
        let mut ch: Vec<Vertex> = t
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| parent[w as usize] == v)
            .collect();
        ch.sort_by(|&a, &b| {
            size[b as usize]
                .cmp(&size[a as usize])
                .then_with(|| code2[a as usize].cmp(&code2[b as usize]))
                .then_with(|| a.cmp(&b))
        });
        children[v as usize] = ch;
    }
    RootedTree {
        tree: t.clone(),
        root,
        parent,
        children,
        subtree_size: size,
    }
}

/// Decodes a Prüfer sequence (length n-2) into a labeled tree.
pub fn tree_from_pruefer(seq: &[Vertex]) -> LabeledTree {
    let n = seq.len() + 2;
    let mut deg = vec![1u32; n];
    for &v in seq {
        deg[v as usize] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut ptr = 0u32; // smallest leaf candidate
    while deg[ptr as usize] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &v in seq {
        edges.push((leaf, v));
        deg[v as usize] -= 1;
        if deg[v as usize] == 1 && v < ptr {
            leaf = v;
        } else {
            ptr += 1;
            while deg[ptr as usize] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, n as u32 - 1));
    build_tree(n, &edges).expect("pruefer decode yields a tree")
}

/// Uniform random labeled tree, resampled until it is not a star. Requires
/// n >= 4 since all smaller trees are stars.
pub fn random_nonstar_tree(n: usize, seed: u64) -> Result<LabeledTree, TreeError> {
    if n < 4 {
        return Err(TreeError::InvalidSize(format!(
            "no nonstar tree on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let seq: Vec<Vertex> = (0..n - 2).map(|_| rng.gen_range(0..n as u32)).collect();
        let t = tree_from_pruefer(&seq);
        if !is_star(&t) {
            return Ok(t);
        }
    }
}

/// One representative per isomorphism class of trees on n vertices.
///
/// Brute force over Prüfer space with canonical-code dedup; fine for the
/// n <= 10 range the harness allows.
pub fn enumerate_free_trees(n: usize) -> Vec<LabeledTree> {
    assert!(n >= 1);
    if n == 1 {
        return vec![build_single()];
    }
    if n == 2 {
        return vec![build_tree(2, &[(0, 1)]).unwrap()];
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut seq = vec![0u32; n - 2];
    loop {
        let t = tree_from_pruefer(&seq);
        let code = canonical_code(&t);
        if seen.insert(code) {
            out.push(t);
        }
        // next sequence
        let mut k = n - 2;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if seq[k] + 1 < n as u32 {
                seq[k] += 1;
                for x in seq[k + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
        }
    }
}

fn build_single() -> LabeledTree {
    LabeledTree {
        n: 1,
        adj: vec![Vec::new()],
        edges: Vec::new(),
    }
}

/// Tree text format: first line `n`, then n-1 lines `u v`, 0-based, LF.
pub fn to_text(t: &LabeledTree) -> String {
    let mut s = String::new();
    writeln!(s, "{}", t.n()).unwrap();
    for &(u, v) in t.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

pub fn from_text(text: &str) -> Result<LabeledTree, TreeError> {
    let mut it = text.split_whitespace();
    let n: usize = it
        .next()
        .ok_or_else(|| TreeError::Parse("empty input".into()))?
        .parse()
        .map_err(|e| TreeError::Parse(format!("bad vertex count: {e}")))?;
    if n == 0 {
        return Err(TreeError::Parse("vertex count must be positive".into()));
    }
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 0..n.saturating_sub(1) {
        let u: Vertex = it
            .next()
            .ok_or_else(|| TreeError::Parse("missing edge endpoint".into()))?
            .parse()
            .map_err(|e| TreeError::Parse(format!("bad endpoint: {e}")))?;
        let v: Vertex = it
            .next()
            .ok_or_else(|| TreeError::Parse("missing edge endpoint".into()))?
            .parse()
            .map_err(|e| TreeError::Parse(format!("bad endpoint: {e}")))?;
        edges.push((u, v));
    }
    if it.next().is_some() {
        return Err(TreeError::Parse("trailing tokens".into()));
    }
    build_tree(n, &edges)
}

/// Deterministic root choice for packing: an endpoint of a longest path with
/// the smallest label.
pub fn longest_path_end(t: &LabeledTree) -> Vertex {
    fn far(t: &LabeledTree, src: Vertex) -> Vec<u32> {
        let mut dist = vec![u32::MAX; t.n()];
        dist[src as usize] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            for &w in t.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
    let d0 = far(t, 0);
    let a = (0..t.n() as u32).max_by_key(|&v| (d0[v as usize], v)).unwrap();
    let da = far(t, a);
    let ecc = *da.iter().max().unwrap();
    // endpoints of some longest path: vertices at distance ecc from a, plus a itself
    let db = {
        let b = (0..t.n() as u32)
            .max_by_key(|&v| (da[v as usize], v))
            .unwrap();
        far(t, b)
    };
    (0..t.n() as u32)
        .filter(|&v| da[v as usize] == ecc || db[v as usize] == ecc)
        .min()
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> LabeledTree {
        build_tree(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    fn k13() -> LabeledTree {
        build_tree(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn build_rejects_non_trees() {
        assert!(build_tree(2, &[(0, 1)]).is_ok());
        assert!(build_tree(4, &[(0, 1), (2, 3), (0, 1)]).is_err());
        assert!(build_tree(3, &[(0, 1), (0, 1)]).is_err());
        assert!(build_tree(4, &[(0, 1), (1, 2), (0, 2)]).is_err());
    }

    #[test]
    fn star_predicate() {
        assert!(is_star(&k13()));
        assert!(!is_star(&p4()));
        assert!(is_star(&build_tree(2, &[(0, 1)]).unwrap()));
        assert!(is_star(&build_tree(3, &[(0, 1), (1, 2)]).unwrap()));
    }

    #[test]
    fn rooting_and_sizes() {
        let rt = root_tree(&p4(), 0);
        assert_eq!(rt.subtree_size, vec![4, 3, 2, 1]);
        assert_eq!(rt.parent(0), None);
        assert_eq!(rt.parent(3), Some(2));

        let rt = root_tree(&k13(), 0);
        assert_eq!(rt.children(0).len(), 3);
        assert!(rt.children(0).iter().all(|&c| rt.size(c) == 1));
    }

    #[test]
    fn children_order_lsfr() {
        // spider with legs 3,2,2 hanging off vertex 0
        let t = build_tree(
            8,
            &[(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (0, 6), (6, 7)],
        )
        .unwrap();
        let rt = root_tree(&t, 0);
        let sizes: Vec<u32> = rt.children(0).iter().map(|&c| rt.size(c)).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
        // equal sizes tie-break by label (codes equal)
        assert_eq!(rt.children(0)[1], 4);
        assert_eq!(rt.children(0)[2], 6);
    }

    #[test]
    fn star_classification() {
        let rt = root_tree(&k13(), 0);
        assert_eq!(classify_rooted_star(&rt, 0), StarClass::CentralStar);
        let rt = root_tree(&k13(), 1);
        assert_eq!(classify_rooted_star(&rt, 1), StarClass::DanglingStar);
        let rt = root_tree(&p4(), 0);
        assert_eq!(classify_rooted_star(&rt, 0), StarClass::NonStar);
        // singletons and pairs are central
        assert_eq!(classify_rooted_star(&rt, 3), StarClass::CentralStar);
        assert_eq!(classify_rooted_star(&rt, 2), StarClass::CentralStar);
    }

    #[test]
    fn min_child() {
        let t = build_tree(9, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 6), (6, 7), (0, 8)])
            .unwrap();
        let rt = root_tree(&t, 0);
        assert_eq!(min_subtree_child(&rt, 0), Ok(8));
        assert!(min_subtree_child(&rt, 8).is_err());
    }

    #[test]
    fn canonical_codes() {
        let p4b = build_tree(4, &[(3, 2), (2, 0), (0, 1)]).unwrap();
        assert_eq!(canonical_code(&p4()), canonical_code(&p4b));
        assert_ne!(canonical_code(&p4()), canonical_code(&k13()));
    }

    #[test]
    fn enumeration_counts() {
        // classic free tree counts
        let want = [1usize, 1, 1, 2, 3, 6, 11, 23, 47];
        for (i, &w) in want.iter().enumerate() {
            let n = i + 1;
            if n >= 3 {
                assert_eq!(enumerate_free_trees(n).len(), w, "n={n}");
            }
        }
    }

    #[test]
    fn random_nonstar_deterministic() {
        assert_eq!(
            random_nonstar_tree(3, 0),
            Err(TreeError::InvalidSize("no nonstar tree on 3 vertices".into()))
        );
        let a = random_nonstar_tree(50, 1).unwrap();
        let b = random_nonstar_tree(50, 1).unwrap();
        assert_eq!(a, b);
        assert!(!is_star(&a));
        let c = random_nonstar_tree(4, 7).unwrap();
        assert_eq!(canonical_code(&c), canonical_code(&p4()));
    }

    #[test]
    fn text_roundtrip() {
        let t = p4();
        let s = to_text(&t);
        assert_eq!(s, "4\n0 1\n1 2\n2 3\n");
        assert_eq!(from_text(&s).unwrap(), t);
        assert!(from_text("3\n0 1\n").is_err());
    }

    #[test]
    fn sizes_sum_invariant() {
        for t in enumerate_free_trees(7) {
            for root in 0..t.n() as u32 {
                let rt = root_tree(&t, root);
                let total: u32 = rt.children(root).iter().map(|&c| rt.size(c)).sum();
                assert_eq!(total as usize, t.n() - 1);
            }
        }
    }
}
