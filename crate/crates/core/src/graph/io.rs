use super::{DecrementalGraph, EdgeId, GraphError};
use std::fmt::Write as _;

/// One line of an update script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptOp {
    Delete(EdgeId),
    Query(usize),
    Path(usize),
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| GraphError::Parse { line, msg: format!("bad {what} `{tok}`") })
}

/// Parses `n m` followed by `m` lines `u v [w]`.
pub fn parse_graph(text: &str) -> Result<DecrementalGraph, GraphError> {
    let mut lines = data_lines(text);
    let (hl, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "empty input".into() })?;
    let mut toks = header.split_whitespace();
    let n: usize = parse_num(toks.next(), hl, "vertex count")?;
    let m: usize = parse_num(toks.next(), hl, "edge count")?;
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines.by_ref().take(m) {
        let mut t = line.split_whitespace();
        let u = parse_num(t.next(), ln, "tail")?;
        let v = parse_num(t.next(), ln, "head")?;
        let w = match t.next() {
            Some(tok) => parse_num(Some(tok), ln, "weight")?,
            None => 1,
        };
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(GraphError::Parse { line: hl, msg: format!("expected {m} edges, found {}", edges.len()) });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(GraphError::Parse { line: ln, msg: "trailing data after edge list".into() });
    }
    DecrementalGraph::load(n, &edges)
}

/// Writes the live edges; weights are omitted when every edge has weight 1.
pub fn write_graph(g: &DecrementalGraph) -> String {
    let unit = g.alive_edges().all(|e| g.edge(e).weight == 1);
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", g.n(), g.alive_count());
    for e in g.alive_edges() {
        let ed = g.edge(e);
        if unit {
            let _ = writeln!(s, "{} {}", ed.from, ed.to);
        } else {
            let _ = writeln!(s, "{} {} {}", ed.from, ed.to, ed.weight);
        }
    }
    s
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptOp>, GraphError> {
    data_lines(text)
        .map(|(ln, line)| {
            let mut t = line.split_whitespace();
            let op = t.next().unwrap_or_default();
            let arg = parse_num(t.next(), ln, "argument")?;
            match op {
                "d" => Ok(ScriptOp::Delete(arg)),
                "q" => Ok(ScriptOp::Query(arg)),
                "p" => Ok(ScriptOp::Path(arg)),
                other => Err(GraphError::Parse { line: ln, msg: format!("unknown op `{other}`") }),
            }
        })
        .collect()
}

pub fn write_script(ops: &[ScriptOp]) -> String {
    let mut s = String::new();
    for op in ops {
        let _ = match op {
            ScriptOp::Delete(e) => writeln!(s, "d {e}"),
            ScriptOp::Query(v) => writeln!(s, "q {v}"),
            ScriptOp::Path(v) => writeln!(s, "p {v}"),
        };
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_text_roundtrip_keeps_weights() {
        let text = "3 3\n0 1 4\n1 2\n# comment\n2 0 7\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.alive_count(), 3);
        assert_eq!(g.edge(1).weight, 1);
        let again = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn short_edge_list_is_rejected() {
        assert!(matches!(parse_graph("3 2\n0 1\n"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn script_parse() {
        let ops = parse_script("d 3\nq 0\n\np 2\n").unwrap();
        assert_eq!(ops, vec![ScriptOp::Delete(3), ScriptOp::Query(0), ScriptOp::Path(2)]);
        assert_eq!(parse_script(&write_script(&ops)).unwrap(), ops);
        assert!(parse_script("x 1").is_err());
    }
}
