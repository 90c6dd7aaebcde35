//! Text formats: edge lists, dense CSV and coordinate matrices, signals,
//! label tables and id lists.
//!
//! Every parser takes untrusted text and reports malformed input as
//! [`Error::Parse`] with a 1-based line number. Floats are written so that
//! they parse back to the identical `f64`.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sparse::CsrMatrix;

/// Formats a float losslessly: integral values below 1e15 print as integers,
/// everything else with 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    format!("{x:.16e}")
}

fn parse_float(s: &str, line: usize) -> Result<f64> {
    let s = s.trim();
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(Error::parse(line, format!("non-finite number `{s}`"))),
        Err(_) => Err(Error::parse(line, format!("invalid number `{s}`"))),
    }
}

fn parse_index(s: &str, line: usize) -> Result<usize> {
    let s = s.trim();
    s.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("invalid node id `{s}`")))
}

/// Yields `(line_number, content)` for lines that are neither blank nor
/// `#` comments.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Parsed edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize, Option<f64>)>,
    /// Original labels by dense id, present only when the file used
    /// non-integer node labels.
    pub labels: Option<Vec<String>>,
}

impl EdgeList {
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.n, &self.edges)
    }
}

/// Parses `u<TAB>v[<TAB>w]` lines with an optional `n=<int>` header.
///
/// When every label is a non-negative integer the labels are the node ids
/// and the node count is `max id + 1` unless the header says otherwise.
/// Otherwise labels are mapped to dense ids in order of first appearance.
pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut header_n = None;
    let mut raw: Vec<(usize, &str, &str, Option<f64>)> = Vec::new();
    for (line, content) in content_lines(text) {
        let trimmed = content.trim();
        if let Some(rest) = trimmed.strip_prefix("n=") {
            if !raw.is_empty() || header_n.is_some() {
                return Err(Error::parse(
                    line,
                    "`n=` header must precede all edges and appear once",
                ));
            }
            let n = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(line, format!("invalid node count `{rest}`")))?;
            if n == 0 {
                return Err(Error::parse(line, "node count must be positive"));
            }
            header_n = Some(n);
            continue;
        }
        let fields: Vec<&str> = content.split('\t').collect();
        let (u, v, w) = match fields.as_slice() {
            [u, v] => (*u, *v, None),
            [u, v, w] => (*u, *v, Some(parse_float(w, line)?)),
            _ => {
                return Err(Error::parse(
                    line,
                    format!(
                        "expected 2 or 3 tab-separated fields, found {}",
                        fields.len()
                    ),
                ))
            }
        };
        let (u, v) = (u.trim(), v.trim());
        if u.is_empty() || v.is_empty() {
            return Err(Error::parse(line, "empty node label"));
        }
        raw.push((line, u, v, w));
    }

    let numeric = raw
        .iter()
        .all(|(_, u, v, _)| u.parse::<usize>().is_ok() && v.parse::<usize>().is_ok());

    let mut edges = Vec::with_capacity(raw.len());
    if numeric {
        let mut max_id = None;
        for &(line, u, v, w) in &raw {
            let (u, v) = (parse_index(u, line)?, parse_index(v, line)?);
            max_id = max_id.max(Some(u.max(v)));
            edges.push((u, v, w));
        }
        let inferred = max_id.map_or(0, |m| m + 1);
        let n = match header_n {
            Some(n) if n < inferred => {
                return Err(Error::IdOutOfRange {
                    id: inferred - 1,
                    n,
                })
            }
            Some(n) => n,
            None => inferred,
        };
        if n == 0 {
            return Err(Error::parse(0, "edge list declares no nodes"));
        }
        Ok(EdgeList {
            n,
            edges,
            labels: None,
        })
    } else {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        for &(_, u, v, w) in &raw {
            let a = intern(&mut ids, &mut labels, u);
            let b = intern(&mut ids, &mut labels, v);
            edges.push((a, b, w));
        }
        let n = match header_n {
            Some(n) if n < labels.len() => {
                return Err(Error::IdOutOfRange {
                    id: labels.len() - 1,
                    n,
                })
            }
            Some(n) => n,
            None => labels.len(),
        };
        Ok(EdgeList {
            n,
            edges,
            labels: Some(labels),
        })
    }
}

fn intern<'a>(ids: &mut HashMap<&'a str, usize>, labels: &mut Vec<String>, s: &'a str) -> usize {
    *ids.entry(s).or_insert_with(|| {
        labels.push(s.to_string());
        labels.len() - 1
    })
}

/// Writes a graph as an edge list with an `n=` header. Unit weights are
/// omitted.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("n={}\n", g.node_count());
    for e in g.edges() {
        if e.w == 1.0 {
            let _ = writeln!(out, "{}\t{}", e.u, e.v);
        } else {
            let _ = writeln!(out, "{}\t{}\t{}", e.u, e.v, format_float(e.w));
        }
    }
    out
}

/// `id<TAB>label` lines for a persisted node-label mapping.
pub fn write_node_map(labels: &[String]) -> String {
    let mut out = String::new();
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i}\t{l}");
    }
    out
}

/// Parses a dense comma-separated matrix, one row per line.
pub fn parse_dense_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, content) in content_lines(text) {
        let row = content
            .split(',')
            .map(|c| parse_float(c, line))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    line,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() {
        return Err(Error::parse(0, "matrix has no rows"));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.into_iter().flatten(),
    ))
}

pub fn write_dense_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_float(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes `# shape <rows> <cols>` followed by one `i j value` line per
/// stored entry.
pub fn write_coordinate(m: &CsrMatrix) -> String {
    let mut out = format!("# shape {} {}\n", m.nrows(), m.ncols());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(out, "{i} {j} {}", format_float(v));
    }
    out
}

pub fn parse_coordinate(text: &str) -> Result<CsrMatrix> {
    let mut shape = None;
    let mut seen = std::collections::HashSet::new();
    let mut triplets = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            if parts.next() == Some("shape") {
                if shape.is_some() {
                    return Err(Error::parse(line, "duplicate shape line"));
                }
                let dims: Vec<&str> = parts.collect();
                let [r, c] = dims.as_slice() else {
                    return Err(Error::parse(line, "shape line needs two dimensions"));
                };
                shape = Some((parse_index(r, line)?, parse_index(c, line)?));
            }
            continue;
        }
        let Some((nrows, ncols)) = shape else {
            return Err(Error::parse(line, "entry before `# shape` line"));
        };
        let fields: Vec<&str> = t.split_whitespace().collect();
        let [r, c, v] = fields.as_slice() else {
            return Err(Error::parse(line, "expected `i j value`"));
        };
        let (r, c, v) = (
            parse_index(r, line)?,
            parse_index(c, line)?,
            parse_float(v, line)?,
        );
        if r >= nrows || c >= ncols {
            return Err(Error::parse(
                line,
                format!("entry ({r}, {c}) outside shape"),
            ));
        }
        if !seen.insert((r, c)) {
            return Err(Error::parse(line, format!("duplicate entry ({r}, {c})")));
        }
        triplets.push((r, c, v));
    }
    let (nrows, ncols) = shape.ok_or_else(|| Error::parse(0, "missing `# shape` line"))?;
    Ok(CsrMatrix::from_triplets(nrows, ncols, &triplets))
}

/// Parses a signal stored as one value per line.
pub fn parse_signal(text: &str) -> Result<Vec<f64>> {
    content_lines(text)
        .map(|(line, c)| parse_float(c, line))
        .collect()
}

pub fn write_signal(values: &[f64]) -> String {
    let mut out = String::new();
    for &v in values {
        out.push_str(&format_float(v));
        out.push('\n');
    }
    out
}

/// Parses `node,label` rows (an optional `node,label` header is skipped).
/// Node ids must cover `0..rows` exactly once.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let mut pairs = Vec::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if pairs.is_empty() && fields == ["node", "label"] {
            continue;
        }
        let [node, label] = fields.as_slice() else {
            return Err(Error::parse(line, "expected `node,label`"));
        };
        pairs.push((line, parse_index(node, line)?, parse_index(label, line)?));
    }
    let n = pairs.len();
    let mut labels = vec![None; n];
    for (line, node, label) in pairs {
        if node >= n {
            return Err(Error::parse(line, format!("node {node} outside 0..{n}")));
        }
        if labels[node].replace(label).is_some() {
            return Err(Error::parse(line, format!("node {node} labelled twice")));
        }
    }
    Ok(labels
        .into_iter()
        .map(|l| l.expect("every slot filled"))
        .collect())
}

pub fn write_labels(labels: &[usize]) -> String {
    let mut out = String::from("node,label\n");
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i},{l}");
    }
    out
}

/// Parses newline-delimited node ids.
pub fn parse_id_list(text: &str) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(line, c)| parse_index(c, line))
        .collect()
}

pub fn write_id_list(ids: &[usize]) -> String {
    let mut out = String::new();
    for id in ids {
        let _ = writeln!(out, "{id}");
    }
    out
}
