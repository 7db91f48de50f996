//! Line-oriented graph text format.
//!
//! One edge per line, `A(t-1) o-> B(t)`, canonical endpoint first. The
//! left glyph is the mark at the first node (`o`, `<`, `-`), the right glyph
//! the mark at the second node (`o`, `>`, `-`).

use super::dynamic::edge_sort_key;
use super::{DynamicPag, Edge, EdgeMark, TimedNode};
use crate::{Error, Result};

/// Variable names used when printing and parsing graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarNames(Vec<String>);

impl VarNames {
    /// `X0, X1, ...`
    pub fn default_for(n: usize) -> Self {
        VarNames((0..n).map(|i| format!("X{i}")).collect())
    }

    pub fn new(names: Vec<String>) -> Self {
        VarNames(names)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.0[var]
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn node_label(&self, v: TimedNode) -> String {
        if v.lag == 0 {
            format!("{}(t)", self.name(v.var))
        } else {
            format!("{}(t-{})", self.name(v.var), v.lag)
        }
    }
}

fn left_glyph(m: EdgeMark) -> char {
    match m {
        EdgeMark::Circle => 'o',
        EdgeMark::Head => '<',
        EdgeMark::Tail => '-',
    }
}

fn right_glyph(m: EdgeMark) -> char {
    match m {
        EdgeMark::Circle => 'o',
        EdgeMark::Head => '>',
        EdgeMark::Tail => '-',
    }
}

pub fn format_edge(e: &Edge, names: &VarNames) -> String {
    format!(
        "{} {}-{} {}",
        names.node_label(e.a),
        left_glyph(e.mark_at_a),
        right_glyph(e.mark_at_b),
        names.node_label(e.b)
    )
}

/// Formats edges one per line in canonical order.
pub fn format_edges(edges: &[Edge], names: &VarNames) -> String {
    let mut sorted = edges.to_vec();
    sorted.sort_by_key(edge_sort_key);
    let mut out = String::new();
    for e in &sorted {
        out.push_str(&format_edge(e, names));
        out.push('\n');
    }
    out
}

impl DynamicPag {
    /// Every edge in the window.
    pub fn to_text(&self, names: &VarNames) -> String {
        format_edges(&self.edges(), names)
    }

    /// Only the homology representatives (edges touching lag 0).
    pub fn to_text_representatives(&self, names: &VarNames) -> String {
        format_edges(&self.minimal_edge_set(), names)
    }
}

fn parse_node(tok: &str, names: &VarNames, line: usize) -> Result<TimedNode> {
    let err = |msg: String| Error::Parse { line, msg };
    let open = tok.rfind('(').ok_or_else(|| err(format!("missing '(' in {tok:?}")))?;
    if !tok.ends_with(')') {
        return Err(err(format!("missing ')' in {tok:?}")));
    }
    let name = &tok[..open];
    let time = &tok[open + 1..tok.len() - 1];
    let var = names.lookup(name).ok_or_else(|| err(format!("unknown variable {name:?}")))?;
    let lag = if time == "t" {
        0
    } else if let Some(k) = time.strip_prefix("t-") {
        k.parse::<usize>().map_err(|_| err(format!("bad lag in {tok:?}")))?
    } else {
        return Err(err(format!("bad time index in {tok:?}")));
    };
    Ok(TimedNode::new(var, lag))
}

/// Parses graph text into a window graph with `names.len()` variables and
/// maximum lag `w`. Each line is applied to its whole homology class, so both
/// full listings and representative-only listings are accepted.
pub fn parse_graph_text(text: &str, names: &VarNames, w: usize) -> Result<DynamicPag> {
    let mut g = DynamicPag::empty(names.len(), w);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse { line, msg: format!("expected 3 fields, got {}", toks.len()) });
        }
        let a = parse_node(toks[0], names, line)?;
        let b = parse_node(toks[2], names, line)?;
        let glyph: Vec<char> = toks[1].chars().collect();
        if glyph.len() != 3 || glyph[1] != '-' {
            return Err(Error::Parse { line, msg: format!("bad edge glyph {:?}", toks[1]) });
        }
        let ma = match glyph[0] {
            'o' => EdgeMark::Circle,
            '<' => EdgeMark::Head,
            '-' => EdgeMark::Tail,
            c => return Err(Error::Parse { line, msg: format!("bad mark {c:?}") }),
        };
        let mb = match glyph[2] {
            'o' => EdgeMark::Circle,
            '>' => EdgeMark::Head,
            '-' => EdgeMark::Tail,
            c => return Err(Error::Parse { line, msg: format!("bad mark {c:?}") }),
        };
        if a.lag > w || b.lag > w {
            return Err(Error::Parse { line, msg: format!("lag exceeds window {w}") });
        }
        g.add_edge_homologous(a, b, ma, mb).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_marks() {
        let names = VarNames::default_for(4);
        let e = Edge::new(TimedNode::new(1, 1), TimedNode::new(2, 0), EdgeMark::Circle, EdgeMark::Head);
        assert_eq!(format_edge(&e, &names), "X1(t-1) o-> X2(t)");
        let e = Edge::new(TimedNode::new(1, 0), TimedNode::new(3, 0), EdgeMark::Head, EdgeMark::Head);
        assert_eq!(format_edge(&e, &names), "X1(t) <-> X3(t)");
        let e = Edge::new(TimedNode::new(0, 2), TimedNode::new(0, 0), EdgeMark::Tail, EdgeMark::Head);
        assert_eq!(format_edge(&e, &names), "X0(t-2) --> X0(t)");
        let e = Edge::new(TimedNode::new(0, 0), TimedNode::new(2, 0), EdgeMark::Circle, EdgeMark::Tail);
        assert_eq!(format_edge(&e, &names), "X0(t) o-- X2(t)");
    }

    #[test]
    fn round_trip_complete() {
        let names = VarNames::new(vec!["Iller".into(), "Danube".into(), "Isar".into()]);
        let mut g = DynamicPag::complete(3, 2);
        g.remove_edge_homologous(TimedNode::new(0, 2), TimedNode::new(2, 0), true).unwrap();
        g.set_mark_homologous(TimedNode::new(0, 0), TimedNode::new(1, 0), EdgeMark::Tail).unwrap();
        let text = g.to_text(&names);
        let back = parse_graph_text(&text, &names, 2).unwrap();
        assert_eq!(back.edges(), g.edges());
        let reps = parse_graph_text(&g.to_text_representatives(&names), &names, 2).unwrap();
        assert_eq!(reps.edges(), g.edges());
    }

    #[test]
    fn parse_errors() {
        let names = VarNames::default_for(2);
        assert!(parse_graph_text("X0(t) o-> X9(t)", &names, 1).is_err());
        assert!(parse_graph_text("X0(t) o=> X1(t)", &names, 1).is_err());
        assert!(parse_graph_text("X0(t-5) o-> X1(t)", &names, 1).is_err());
        // tail at the later node of a temporal edge
        assert!(parse_graph_text("X0(t-1) <-- X1(t)", &names, 1).is_err());
        assert!(parse_graph_text("# comment\n\nX0(t-1) --> X1(t)\n", &names, 1).is_ok());
    }
}
