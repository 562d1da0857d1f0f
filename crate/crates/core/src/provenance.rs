//! Provenance graphs and the fragments extracted from them.
//!
//! A graph holds Artifact, Agent and Process nodes joined by typed, directed
//! edges. Every edge `relation: source -> target` yields the fragment
//! `relation(source label, target label)`. The canonical byte form of a
//! fragment is what gets hashed into the pairing group, so user-side tagging
//! and administrator-side trapdoors agree exactly when canonical forms do.
//!
//! Canonical form: `Relation(arg1,arg2,...)` in UTF-8, every token trimmed of
//! surrounding whitespace, single commas between arguments, no other
//! separators. Tokens are case-sensitive and may not contain `,`, `(` or `)`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Artifact,
    Agent,
    Process,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Artifact => "artifact",
            NodeKind::Agent => "agent",
            NodeKind::Process => "process",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "artifact" => Ok(NodeKind::Artifact),
            "agent" => Ok(NodeKind::Agent),
            "process" => Ok(NodeKind::Process),
            _ => Err(Error::InvalidGraph(format!("unknown node kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenanceNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
}

impl ProvenanceNode {
    pub fn new(id: impl Into<String>, kind: NodeKind, label: impl Into<String>) -> Self {
        Self { id: id.into(), kind, label: label.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProvenanceEdge {
    pub relation: String,
    pub source: String,
    pub target: String,
}

impl ProvenanceEdge {
    pub fn new(relation: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        Self { relation: relation.into(), source: source.into(), target: target.into() }
    }
}

/// A validated, acyclic provenance graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenanceGraph {
    nodes: BTreeMap<String, ProvenanceNode>,
    edges: Vec<ProvenanceEdge>,
}

impl ProvenanceGraph {
    pub fn empty() -> Self {
        Self { nodes: BTreeMap::new(), edges: Vec::new() }
    }

    /// Checks id uniqueness, edge endpoints and acyclicity.
    pub fn new(nodes: Vec<ProvenanceNode>, edges: Vec<ProvenanceEdge>) -> Result<Self, Error> {
        let mut map = BTreeMap::new();
        for node in nodes {
            if node.id.is_empty() {
                return Err(Error::InvalidGraph("empty node id".to_string()));
            }
            if map.contains_key(&node.id) {
                return Err(Error::InvalidGraph(format!("duplicate node id `{}`", node.id)));
            }
            map.insert(node.id.clone(), node);
        }
        for edge in &edges {
            for end in [&edge.source, &edge.target] {
                if !map.contains_key(end) {
                    return Err(Error::InvalidGraph(format!(
                        "edge `{}` refers to unknown node `{end}`",
                        edge.relation
                    )));
                }
            }
        }
        let graph = Self { nodes: map, edges };
        graph.check_acyclic()?;
        Ok(graph)
    }

    fn check_acyclic(&self) -> Result<(), Error> {
        let mut indegree: BTreeMap<&str, usize> = self.nodes.keys().map(|k| (k.as_str(), 0)).collect();
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            *indegree.get_mut(e.target.as_str()).expect("endpoint validated") += 1;
            out.entry(e.source.as_str()).or_default().push(e.target.as_str());
        }
        let mut queue: VecDeque<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut visited = 0;
        while let Some(n) = queue.pop_front() {
            visited += 1;
            for m in out.get(n).into_iter().flatten() {
                let d = indegree.get_mut(m).expect("endpoint validated");
                *d -= 1;
                if *d == 0 {
                    queue.push_back(m);
                }
            }
        }
        if visited == self.nodes.len() {
            Ok(())
        } else {
            let stuck = indegree.iter().find(|(_, d)| **d > 0).map(|(k, _)| *k).unwrap_or_default();
            Err(Error::CyclicGraph(stuck.to_string()))
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ProvenanceNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: &str) -> Option<&ProvenanceNode> {
        self.nodes.get(id)
    }

    pub fn edges(&self) -> &[ProvenanceEdge] {
        &self.edges
    }

    /// One fragment per typed edge, `relation(source label, target label)`,
    /// deduplicated and sorted by canonical form.
    pub fn fragments(&self) -> Result<Vec<ProvenanceFragment>, Error> {
        let mut out = BTreeMap::new();
        for e in &self.edges {
            let src = &self.nodes[&e.source].label;
            let dst = &self.nodes[&e.target].label;
            let f = ProvenanceFragment::new(e.relation.as_str(), [src.as_str(), dst.as_str()])?;
            out.insert(f.canonical_string(), f);
        }
        Ok(out.into_values().collect())
    }
}

/// See [`ProvenanceGraph::fragments`].
pub fn extract_fragments(graph: &ProvenanceGraph) -> Result<Vec<ProvenanceFragment>, Error> {
    graph.fragments()
}

/// A typed relation such as `RecordedBy(Test, Nurse)`. Tokens are stored
/// trimmed, so equality coincides with equality of canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProvenanceFragment {
    relation: String,
    args: Vec<String>,
}

fn check_token(token: &str, what: &str) -> Result<String, Error> {
    let t = token.trim();
    if t.is_empty() {
        return Err(Error::InvalidFragment(format!("empty {what}")));
    }
    if let Some(c) = t.chars().find(|c| matches!(c, ',' | '(' | ')')) {
        return Err(Error::InvalidFragment(format!("{what} `{t}` contains reserved character `{c}`")));
    }
    Ok(t.to_string())
}

impl ProvenanceFragment {
    pub fn new<I, A>(relation: &str, args: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = A>,
        A: AsRef<str>,
    {
        let relation = check_token(relation, "relation")?;
        let args = args
            .into_iter()
            .map(|a| check_token(a.as_ref(), "argument"))
            .collect::<Result<Vec<_>, _>>()?;
        if args.is_empty() {
            return Err(Error::InvalidFragment(format!("`{relation}` has no arguments")));
        }
        Ok(Self { relation, args })
    }

    /// Parses `Relation(arg, arg, ...)`, tolerating whitespace around tokens.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let text = text.trim();
        let open = text
            .find('(')
            .ok_or_else(|| Error::InvalidFragment(format!("`{text}`: missing `(`")))?;
        let inner = text[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| Error::InvalidFragment(format!("`{text}`: missing closing `)`")))?;
        if inner.contains('(') || inner.contains(')') {
            return Err(Error::InvalidFragment(format!("`{text}`: unbalanced parentheses")));
        }
        let args: Vec<&str> = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').collect() };
        Self::new(&text[..open], args)
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    pub fn canonical_string(&self) -> String {
        let mut s = String::with_capacity(self.relation.len() + 2 + self.args.iter().map(|a| a.len() + 1).sum::<usize>());
        s.push_str(&self.relation);
        s.push('(');
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(a);
        }
        s.push(')');
        s
    }

    /// The exact bytes fed to `hash_to_group_a`.
    pub fn canonicalize(&self) -> Vec<u8> {
        self.canonical_string().into_bytes()
    }
}

/// Human-readable form with `", "` separators. [`ProvenanceFragment::parse`]
/// accepts it back.
impl fmt::Display for ProvenanceFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(a)?;
        }
        f.write_str(")")
    }
}

impl FromStr for ProvenanceFragment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::parse(s)
    }
}

/// Distinct canonical forms in a fragment list.
pub fn canonical_set(fragments: &[ProvenanceFragment]) -> BTreeSet<String> {
    fragments.iter().map(ProvenanceFragment::canonical_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn node(id: &str, kind: NodeKind) -> ProvenanceNode {
        ProvenanceNode::new(id, kind, id)
    }

    #[test]
    fn canonical_form_of_medical_keywords() {
        let f = ProvenanceFragment::new("RecordedBy", ["Test", "Nurse"]).unwrap();
        assert_eq!(f.canonicalize(), b"RecordedBy(Test,Nurse)");
        let g = ProvenanceFragment::new("DiagnosedBy", [" Report ", "Doctor"]).unwrap();
        assert_eq!(g.canonical_string(), "DiagnosedBy(Report,Doctor)");
        assert_eq!(ProvenanceFragment::parse("RecordedBy (Test, Nurse)").unwrap(), f);
    }

    #[test]
    fn invalid_fragments_are_rejected() {
        assert!(ProvenanceFragment::new("", ["a"]).is_err());
        assert!(ProvenanceFragment::new("R", Vec::<&str>::new()).is_err());
        assert!(ProvenanceFragment::new("R", ["a", " "]).is_err());
        assert!(ProvenanceFragment::new("R(x", ["a"]).is_err());
        assert!(ProvenanceFragment::new("R", ["a,b"]).is_err());
        assert!(ProvenanceFragment::parse("RecordedBy(Test").is_err());
        assert!(ProvenanceFragment::parse("RecordedBy").is_err());
        assert!(ProvenanceFragment::parse("RecordedBy()").is_err());
        assert!(ProvenanceFragment::parse("A(b(c))").is_err());
        assert!(ProvenanceFragment::parse("A(b)c").is_err());
    }

    #[test]
    fn fragments_are_case_sensitive() {
        let a = ProvenanceFragment::parse("R(a,b)").unwrap();
        let b = ProvenanceFragment::parse("r(a,b)").unwrap();
        assert_ne!(a.canonicalize(), b.canonicalize());
    }

    #[test]
    fn empty_graph_has_no_fragments() {
        assert!(ProvenanceGraph::empty().fragments().unwrap().is_empty());
    }

    #[test]
    fn single_edge_graph() {
        let g = ProvenanceGraph::new(
            vec![node("Test", NodeKind::Artifact), node("Nurse", NodeKind::Agent)],
            vec![ProvenanceEdge::new("RecordedBy", "Test", "Nurse")],
        )
        .unwrap();
        let f = g.fragments().unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].canonical_string(), "RecordedBy(Test,Nurse)");
    }

    #[test]
    fn duplicate_edges_collapse() {
        let e = ProvenanceEdge::new("RecordedBy", "Test", "Nurse");
        let g = ProvenanceGraph::new(
            vec![node("Test", NodeKind::Artifact), node("Nurse", NodeKind::Agent)],
            vec![e.clone(), e],
        )
        .unwrap();
        assert_eq!(g.fragments().unwrap().len(), 1);
    }

    #[test]
    fn fragments_use_labels_not_ids() {
        let g = ProvenanceGraph::new(
            vec![
                ProvenanceNode::new("n1", NodeKind::Artifact, "Blood Test"),
                ProvenanceNode::new("n2", NodeKind::Agent, "Nurse"),
            ],
            vec![ProvenanceEdge::new("RecordedBy", "n1", "n2")],
        )
        .unwrap();
        assert_eq!(g.fragments().unwrap()[0].canonical_string(), "RecordedBy(Blood Test,Nurse)");
    }

    #[test]
    fn cycles_and_dangling_edges_are_rejected() {
        let nodes = vec![node("a", NodeKind::Process), node("b", NodeKind::Artifact)];
        let cyc = ProvenanceGraph::new(
            nodes.clone(),
            vec![ProvenanceEdge::new("Used", "a", "b"), ProvenanceEdge::new("WasGeneratedBy", "b", "a")],
        );
        assert!(matches!(cyc, Err(Error::CyclicGraph(_))));
        let self_loop = ProvenanceGraph::new(nodes.clone(), vec![ProvenanceEdge::new("Used", "a", "a")]);
        assert!(matches!(self_loop, Err(Error::CyclicGraph(_))));
        let dangling = ProvenanceGraph::new(nodes.clone(), vec![ProvenanceEdge::new("Used", "a", "z")]);
        assert!(matches!(dangling, Err(Error::InvalidGraph(_))));
        let dup = ProvenanceGraph::new(vec![node("a", NodeKind::Agent), node("a", NodeKind::Agent)], vec![]);
        assert!(matches!(dup, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn edge_labels_with_reserved_characters_fail_extraction() {
        let g = ProvenanceGraph::new(
            vec![
                ProvenanceNode::new("a", NodeKind::Artifact, "x,y"),
                ProvenanceNode::new("b", NodeKind::Agent, "z"),
            ],
            vec![ProvenanceEdge::new("R", "a", "b")],
        )
        .unwrap();
        assert!(g.fragments().is_err());
    }

    fn token() -> impl Strategy<Value = String> {
        "[A-Za-z0-9_ .:-]{0,6}[A-Za-z0-9_]{1,4}"
    }

    fn fragment() -> impl Strategy<Value = ProvenanceFragment> {
        (token(), proptest::collection::vec(token(), 1..4))
            .prop_map(|(r, a)| ProvenanceFragment::new(&r, a).unwrap())
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(f in fragment()) {
            let back = ProvenanceFragment::parse(&f.to_string()).unwrap();
            prop_assert_eq!(back.canonicalize(), f.canonicalize());
        }

        #[test]
        fn canonicalize_is_injective(a in fragment(), b in fragment()) {
            prop_assert_eq!(a == b, a.canonicalize() == b.canonicalize());
        }

        #[test]
        fn surrounding_whitespace_is_irrelevant(f in fragment(), pad in "[ \t]{0,3}") {
            let padded: Vec<String> = f.args().iter().map(|a| format!("{pad}{a}{pad}")).collect();
            let g = ProvenanceFragment::new(&format!("{pad}{}", f.relation()), padded).unwrap();
            prop_assert_eq!(g.canonicalize(), f.canonicalize());
        }

        #[test]
        fn extraction_ignores_edge_order(
            edges in proptest::collection::vec((0usize..3, 0usize..6, 0usize..6), 0..12),
            seed in any::<u64>(),
        ) {
            // a DAG by construction: edges only go from lower to higher index
            let nodes: Vec<_> = (0..6).map(|i| ProvenanceNode::new(format!("n{i}"), NodeKind::Artifact, format!("L{i}"))).collect();
            let rels = ["Used", "WasGeneratedBy", "RecordedBy"];
            let es: Vec<_> = edges
                .iter()
                .filter(|(_, s, t)| s < t)
                .map(|(r, s, t)| ProvenanceEdge::new(rels[*r], format!("n{s}"), format!("n{t}")))
                .collect();
            let mut shuffled = es.clone();
            let n = shuffled.len();
            if n > 1 {
                let mut x = seed;
                for i in (1..n).rev() {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (x >> 33) as usize % (i + 1));
                }
            }
            let a = ProvenanceGraph::new(nodes.clone(), es).unwrap().fragments().unwrap();
            let b = ProvenanceGraph::new(nodes, shuffled).unwrap().fragments().unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
