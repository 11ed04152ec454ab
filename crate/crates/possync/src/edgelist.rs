//! Edge-list text format: a header `n <count>` followed by one `i j w` line
//! per edge (0-based endpoints, decimal weight). Blank lines and lines
//! starting with `#` are ignored.
//!
//! Weights are written with the shortest representation that parses back to
//! the same `f64`, so `parse(&write(g)) == g` bit for bit.

use std::fmt::Write as _;

use possync_core::Graph;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EdgeListError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `n <count>` header")]
    MissingHeader,
    #[error("invalid graph: {0}")]
    Graph(possync_core::Error),
}

pub fn write(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for &(i, j, w) in g.edges() {
        writeln!(out, "{i} {j} {w}").expect("writing to a String cannot fail");
    }
    out
}

pub fn parse(text: &str) -> Result<Graph, EdgeListError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines.next().ok_or(EdgeListError::MissingHeader)?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["n", count] => count.parse::<usize>().map_err(|e| EdgeListError::Syntax {
            line,
            message: format!("node count {count:?}: {e}"),
        })?,
        _ => return Err(EdgeListError::MissingHeader),
    };
    let mut edges = Vec::new();
    for (line, body) in lines {
        let syntax = |message: String| EdgeListError::Syntax { line, message };
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [i, j, w] = fields.as_slice() else {
            return Err(syntax(format!("expected `i j w`, found {body:?}")));
        };
        let i = i
            .parse::<usize>()
            .map_err(|e| syntax(format!("endpoint {i:?}: {e}")))?;
        let j = j
            .parse::<usize>()
            .map_err(|e| syntax(format!("endpoint {j:?}: {e}")))?;
        let w = w
            .parse::<f64>()
            .map_err(|e| syntax(format!("weight {w:?}: {e}")))?;
        edges.push((i, j, w));
    }
    Graph::new(n, edges).map_err(EdgeListError::Graph)
}
