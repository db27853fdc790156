use std::fs;
use std::path::Path;

use super::{Edge, Graph, VertexId};
use crate::error::{Error, Result};

const GRAPH_MAGIC: &[u8; 4] = b"SWG1";
const VECTOR_MAGIC: &[u8; 4] = b"SWV1";
const EDGE_RECORD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    Text,
    Binary,
}

impl EdgeListFormat {
    /// Picks binary for files starting with the graph magic, text otherwise.
    pub fn sniff(bytes: &[u8]) -> Self {
        if bytes.starts_with(GRAPH_MAGIC) {
            EdgeListFormat::Binary
        } else {
            EdgeListFormat::Text
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn load_edge_list(path: impl AsRef<Path>, fmt: EdgeListFormat) -> Result<Graph> {
    let bytes = read_file(path.as_ref())?;
    match fmt {
        EdgeListFormat::Binary => read_binary_graph(&bytes),
        EdgeListFormat::Text => {
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::Format {
                what: "text edge list",
                message: format!("not valid UTF-8: {e}"),
            })?;
            parse_text_edge_list(text)
        }
    }
}

fn parse_id(tok: &str, line: usize) -> Result<VertexId> {
    if tok.starts_with('-') {
        return Err(Error::Parse { line, message: format!("negative vertex id {tok:?}") });
    }
    let wide: u64 = tok
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("invalid vertex id {tok:?}") })?;
    VertexId::try_from(wide).map_err(|_| Error::EndpointOverflow { line, id: tok.to_string() })
}

fn parse_header(comment: &str, line: usize) -> Result<Option<usize>> {
    let body = comment.trim_start_matches('#').trim();
    let Some(rest) = body.strip_prefix("vertices:") else {
        return Ok(None);
    };
    let n: usize = rest.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid vertex count in header {:?}", rest.trim()),
    })?;
    Ok(Some(n))
}

/// Parses `src dst [weight]` lines. `#` starts a comment line; `# vertices: N`
/// fixes the vertex count, otherwise it is one past the largest endpoint.
pub fn parse_text_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut header: Option<usize> = None;
    let mut max_id: Option<VertexId> = None;
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('#') {
            if let Some(n) = parse_header(content, line)? {
                header = Some(n);
            }
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `src dst [weight]`, found {} fields", toks.len()),
            });
        }
        let src = parse_id(toks[0], line)?;
        let dst = parse_id(toks[1], line)?;
        let weight = match toks.get(2) {
            Some(t) => {
                let w: f64 = t
                    .parse()
                    .map_err(|_| Error::Parse { line, message: format!("invalid weight {t:?}") })?;
                if !w.is_finite() {
                    return Err(Error::Parse { line, message: format!("non-finite weight {t:?}") });
                }
                w
            }
            None => 1.0,
        };
        max_id = Some(max_id.map_or(src.max(dst), |m| m.max(src).max(dst)));
        edges.push(Edge::new(src, dst, weight));
    }
    let implied = max_id.map(|m| m as usize + 1);
    let num_vertices = match (header, implied) {
        (None, None) => return Err(Error::EmptyFile),
        (Some(h), Some(n)) if h < n => {
            return Err(Error::InvalidGraph(format!(
                "header declares {h} vertices but ids reach {}",
                n - 1
            )))
        }
        (Some(h), _) => h,
        (None, Some(n)) => n,
    };
    Graph::new(num_vertices, edges)
}

fn take<'a>(bytes: &'a [u8], at: &mut usize, n: usize, what: &'static str) -> Result<&'a [u8]> {
    let end = at.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| Error::Format {
        what,
        message: format!("truncated at byte {}", *at),
    })?;
    let out = &bytes[*at..end];
    *at = end;
    Ok(out)
}

fn read_u64(bytes: &[u8], at: &mut usize, what: &'static str) -> Result<u64> {
    let b = take(bytes, at, 8, what)?;
    Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
}

pub fn read_binary_graph(bytes: &[u8]) -> Result<Graph> {
    const WHAT: &str = "binary graph";
    let mut at = 0;
    if take(bytes, &mut at, 4, WHAT)? != GRAPH_MAGIC {
        return Err(Error::Format { what: WHAT, message: "bad magic".into() });
    }
    let v = read_u64(bytes, &mut at, WHAT)?;
    let e = read_u64(bytes, &mut at, WHAT)?;
    let expected = (e as u128) * EDGE_RECORD as u128;
    if (bytes.len() - at) as u128 != expected {
        return Err(Error::Format {
            what: WHAT,
            message: format!("header declares {e} edges but payload holds {} bytes", bytes.len() - at),
        });
    }
    let mut edges = Vec::with_capacity(e as usize);
    for rec in bytes[at..].chunks_exact(EDGE_RECORD) {
        let src = u32::from_le_bytes(rec[0..4].try_into().expect("4 bytes"));
        let dst = u32::from_le_bytes(rec[4..8].try_into().expect("4 bytes"));
        let weight = f64::from_le_bytes(rec[8..16].try_into().expect("8 bytes"));
        edges.push(Edge::new(src, dst, weight));
    }
    let v = usize::try_from(v)
        .map_err(|_| Error::Format { what: WHAT, message: format!("vertex count {v} too large") })?;
    Graph::new(v, edges)
}

pub fn write_binary_graph(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let mut out = Vec::with_capacity(20 + g.num_edges() * EDGE_RECORD);
    out.extend_from_slice(GRAPH_MAGIC);
    out.extend_from_slice(&(g.num_vertices() as u64).to_le_bytes());
    out.extend_from_slice(&(g.num_edges() as u64).to_le_bytes());
    for e in g.edges() {
        out.extend_from_slice(&e.src.to_le_bytes());
        out.extend_from_slice(&e.dst.to_le_bytes());
        out.extend_from_slice(&e.weight.to_le_bytes());
    }
    let path = path.as_ref();
    fs::write(path, out).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    const WHAT: &str = "vector";
    let bytes = read_file(path.as_ref())?;
    let mut at = 0;
    if take(&bytes, &mut at, 4, WHAT)? != VECTOR_MAGIC {
        return Err(Error::Format { what: WHAT, message: "bad magic".into() });
    }
    let len = read_u64(&bytes, &mut at, WHAT)?;
    if (bytes.len() - at) as u128 != len as u128 * 8 {
        return Err(Error::Format {
            what: WHAT,
            message: format!("header declares {len} values but payload holds {} bytes", bytes.len() - at),
        });
    }
    Ok(bytes[at..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

pub fn write_vector(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    let mut out = Vec::with_capacity(12 + values.len() * 8);
    out.extend_from_slice(VECTOR_MAGIC);
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let path = path.as_ref();
    fs::write(path, out).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
