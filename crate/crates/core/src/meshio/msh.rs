//! ASCII Gmsh MSH reader (versions 2.2 and 4.1).
//!
//! Only the element types a 2D P1 mesh needs are accepted: 15 (point),
//! 1 (2-node line) and 2 (3-node triangle). Node tags are renumbered to
//! dense indices by ascending tag, so both versions of the same mesh yield
//! identical [`Mesh`] values.

use std::collections::{BTreeMap, HashMap};

use super::{BoundaryEdge, Mesh, PhysicalKey, TaggedPoint};
use crate::error::{Error, Result};

const ELEM_LINE: u32 = 1;
const ELEM_TRIANGLE: u32 = 2;
const ELEM_POINT: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Version {
    V22,
    V41,
}

struct Section<'a> {
    name: &'a str,
    /// 1-based line number of the `$Name` header.
    start: usize,
    lines: Vec<&'a str>,
}

impl<'a> Section<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            section: self.name.to_string(),
            line: self.start + 1 + offset,
            message: message.into(),
        }
    }

    fn tokens(&self) -> Tokens<'a, '_> {
        Tokens {
            section: self,
            line: 0,
            inner: self.lines.first().map(|l| l.split_whitespace()),
        }
    }
}

/// Whitespace token stream across the lines of one section.
struct Tokens<'a, 's> {
    section: &'s Section<'a>,
    line: usize,
    inner: Option<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a, '_> {
    fn next_token(&mut self) -> Result<&'a str> {
        loop {
            match self.inner.as_mut().and_then(|it| it.next()) {
                Some(tok) => return Ok(tok),
                None => {
                    self.line += 1;
                    match self.section.lines.get(self.line) {
                        Some(l) => self.inner = Some(l.split_whitespace()),
                        None => {
                            return Err(self.section.err(self.line, "unexpected end of section"))
                        }
                    }
                }
            }
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next_token()?;
        tok.parse()
            .map_err(|_| self.section.err(self.line, format!("bad {what}: {tok:?}")))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        self.parse(what)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.parse(what)
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        self.parse(what)
    }

    /// Drops the remainder of the current line.
    fn skip_line(&mut self) {
        self.inner = Some("".split_whitespace());
    }
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>> {
    let mut sections = Vec::new();
    let mut lines = text.lines().enumerate();
    while let Some((i, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let Some(name) = line.strip_prefix('$') else {
            return Err(Error::Parse {
                section: "<top level>".into(),
                line: i + 1,
                message: format!("expected a $Section header, found {line:?}"),
            });
        };
        let end = format!("$End{name}");
        let mut body = Vec::new();
        let mut closed = false;
        for (_, raw) in lines.by_ref() {
            if raw.trim() == end {
                closed = true;
                break;
            }
            body.push(raw);
        }
        if !closed {
            return Err(Error::Parse {
                section: name.to_string(),
                line: i + 1 + body.len(),
                message: format!("file ends before {end}"),
            });
        }
        sections.push(Section {
            name,
            start: i + 1,
            lines: body,
        });
    }
    Ok(sections)
}

fn parse_format(sec: &Section<'_>) -> Result<Version> {
    let mut t = sec.tokens();
    let version = t.next_token()?;
    let file_type: i32 = t.parse("file type")?;
    if file_type != 0 {
        return Err(Error::UnsupportedFormat(
            "binary MSH files are not supported; re-export as ASCII".into(),
        ));
    }
    match version {
        "2.2" => Ok(Version::V22),
        "4.1" => Ok(Version::V41),
        v => Err(Error::UnsupportedFormat(format!(
            "MSH version {v} (supported: 2.2, 4.1)"
        ))),
    }
}

fn parse_physical_names(sec: &Section<'_>) -> Result<BTreeMap<PhysicalKey, String>> {
    let count: usize = sec
        .lines
        .first()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| sec.err(0, "missing physical name count"))?;
    let mut names = BTreeMap::new();
    for k in 0..count {
        let line = sec
            .lines
            .get(k + 1)
            .ok_or_else(|| sec.err(k + 1, "unexpected end of section"))?;
        let mut parts = line.trim().splitn(3, char::is_whitespace);
        let dim: u8 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| sec.err(k + 1, "bad dimension"))?;
        let tag: i32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| sec.err(k + 1, "bad physical tag"))?;
        let name = parts
            .next()
            .map(|s| s.trim().trim_matches('"').to_string())
            .ok_or_else(|| sec.err(k + 1, "missing name"))?;
        if names.insert((dim, tag), name).is_some() {
            return Err(sec.err(k + 1, format!("duplicate physical name for ({dim}, {tag})")));
        }
    }
    Ok(names)
}

/// Physical tags of each `(dim, entity)` from a 4.1 `$Entities` section.
fn parse_entities(sec: &Section<'_>) -> Result<HashMap<(u8, i32), Vec<i32>>> {
    let mut t = sec.tokens();
    let counts = [
        t.usize("point count")?,
        t.usize("curve count")?,
        t.usize("surface count")?,
        t.usize("volume count")?,
    ];
    let mut map = HashMap::new();
    for (dim, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let tag = t.i32("entity tag")?;
            let n_coords = if dim == 0 { 3 } else { 6 };
            for _ in 0..n_coords {
                t.f64("entity coordinate")?;
            }
            let n_phys = t.usize("physical tag count")?;
            let phys = (0..n_phys)
                .map(|_| t.i32("physical tag"))
                .collect::<Result<Vec<_>>>()?;
            if dim > 0 {
                let n_bound = t.usize("bounding entity count")?;
                for _ in 0..n_bound {
                    t.i32("bounding entity")?;
                }
            }
            map.insert((dim as u8, tag), phys);
        }
    }
    Ok(map)
}

type RawNodes = Vec<(usize, [f64; 2])>;

fn parse_nodes(sec: &Section<'_>, version: Version) -> Result<RawNodes> {
    let mut t = sec.tokens();
    let mut nodes = Vec::new();
    match version {
        Version::V22 => {
            let count = t.usize("node count")?;
            nodes.reserve(count);
            for _ in 0..count {
                let tag = t.usize("node tag")?;
                let x = t.f64("x")?;
                let y = t.f64("y")?;
                t.f64("z")?;
                nodes.push((tag, [x, y]));
            }
        }
        Version::V41 => {
            let blocks = t.usize("entity block count")?;
            let count = t.usize("node count")?;
            t.usize("min node tag")?;
            t.usize("max node tag")?;
            nodes.reserve(count);
            for _ in 0..blocks {
                let dim = t.usize("entity dimension")?;
                t.i32("entity tag")?;
                let parametric = t.usize("parametric flag")? != 0;
                let n = t.usize("block node count")?;
                let tags = (0..n)
                    .map(|_| t.usize("node tag"))
                    .collect::<Result<Vec<_>>>()?;
                let n_param = if parametric { dim } else { 0 };
                for tag in tags {
                    let x = t.f64("x")?;
                    let y = t.f64("y")?;
                    t.f64("z")?;
                    for _ in 0..n_param {
                        t.f64("parametric coordinate")?;
                    }
                    nodes.push((tag, [x, y]));
                }
            }
            if nodes.len() != count {
                return Err(sec.err(
                    0,
                    format!("header promises {count} nodes, found {}", nodes.len()),
                ));
            }
        }
    }
    Ok(nodes)
}

struct RawElement {
    kind: u32,
    physical: i32,
    nodes: Vec<usize>,
}

fn nodes_per_element(kind: u32) -> Option<usize> {
    match kind {
        ELEM_POINT => Some(1),
        ELEM_LINE => Some(2),
        ELEM_TRIANGLE => Some(3),
        _ => None,
    }
}

fn unknown_type(sec: &Section<'_>, line: usize, kind: u32) -> Error {
    sec.err(
        line,
        format!("unsupported element type {kind} (supported: 15 point, 1 line, 2 triangle)"),
    )
}

fn parse_elements(
    sec: &Section<'_>,
    version: Version,
    entities: &HashMap<(u8, i32), Vec<i32>>,
) -> Result<Vec<RawElement>> {
    let mut t = sec.tokens();
    let mut out = Vec::new();
    match version {
        Version::V22 => {
            let count = t.usize("element count")?;
            for _ in 0..count {
                t.usize("element number")?;
                let kind: u32 = t.parse("element type")?;
                let n_tags = t.usize("tag count")?;
                let tags = (0..n_tags)
                    .map(|_| t.i32("element tag"))
                    .collect::<Result<Vec<_>>>()?;
                let n = nodes_per_element(kind).ok_or_else(|| unknown_type(sec, t.line, kind))?;
                let nodes = (0..n)
                    .map(|_| t.usize("node reference"))
                    .collect::<Result<Vec<_>>>()?;
                out.push(RawElement {
                    kind,
                    physical: tags.first().copied().unwrap_or(0),
                    nodes,
                });
            }
        }
        Version::V41 => {
            let blocks = t.usize("entity block count")?;
            t.usize("element count")?;
            t.usize("min element tag")?;
            t.usize("max element tag")?;
            for _ in 0..blocks {
                let dim: u8 = t.parse("entity dimension")?;
                let entity = t.i32("entity tag")?;
                let kind: u32 = t.parse("element type")?;
                let n_elems = t.usize("block element count")?;
                let n = nodes_per_element(kind).ok_or_else(|| unknown_type(sec, t.line, kind))?;
                let physicals = match entities.get(&(dim, entity)) {
                    Some(p) if !p.is_empty() => p.clone(),
                    _ => vec![0],
                };
                for _ in 0..n_elems {
                    t.usize("element tag")?;
                    let nodes = (0..n)
                        .map(|_| t.usize("node reference"))
                        .collect::<Result<Vec<_>>>()?;
                    // One element per physical group, as version 2.2 writes them.
                    for &physical in &physicals {
                        out.push(RawElement {
                            kind,
                            physical,
                            nodes: nodes.clone(),
                        });
                    }
                }
            }
        }
    }
    t.skip_line();
    Ok(out)
}

/// Parses an ASCII MSH 2.2 or 4.1 file.
pub fn parse_msh(bytes: &[u8]) -> Result<Mesh> {
    let text = std::str::from_utf8(bytes).map_err(|_| {
        Error::UnsupportedFormat("file is not valid UTF-8 text (binary MSH?)".into())
    })?;
    let sections = split_sections(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);

    let format = find("MeshFormat").ok_or_else(|| Error::Parse {
        section: "MeshFormat".into(),
        line: 0,
        message: "missing $MeshFormat section".into(),
    })?;
    let version = parse_format(format)?;

    let physical_names = match find("PhysicalNames") {
        Some(sec) => parse_physical_names(sec)?,
        None => BTreeMap::new(),
    };
    let entities = match (version, find("Entities")) {
        (Version::V41, Some(sec)) => parse_entities(sec)?,
        (Version::V41, None) => {
            return Err(Error::Parse {
                section: "Entities".into(),
                line: 0,
                message: "MSH 4.1 file has no $Entities section".into(),
            })
        }
        (Version::V22, _) => HashMap::new(),
    };

    let missing = |name: &str| Error::Parse {
        section: name.into(),
        line: 0,
        message: format!("missing ${name} section"),
    };
    let raw_nodes = parse_nodes(find("Nodes").ok_or_else(|| missing("Nodes"))?, version)?;
    let elements = parse_elements(
        find("Elements").ok_or_else(|| missing("Elements"))?,
        version,
        &entities,
    )?;

    let mut tags: Vec<usize> = raw_nodes.iter().map(|(t, _)| *t).collect();
    tags.sort_unstable();
    if tags.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Integrity("duplicate node tag".into()));
    }
    let index: HashMap<usize, usize> = tags.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut nodes = vec![[0.0; 2]; tags.len()];
    for (tag, xy) in &raw_nodes {
        nodes[index[tag]] = *xy;
    }

    let resolve = |tag: usize| {
        index
            .get(&tag)
            .copied()
            .ok_or_else(|| Error::Integrity(format!("element references undefined node tag {tag}")))
    };

    let mut triangles = Vec::new();
    let mut edges = Vec::new();
    let mut points = Vec::new();
    for el in &elements {
        let ids = el
            .nodes
            .iter()
            .map(|&t| resolve(t))
            .collect::<Result<Vec<_>>>()?;
        match el.kind {
            ELEM_TRIANGLE => triangles.push([ids[0], ids[1], ids[2]]),
            ELEM_LINE => edges.push(BoundaryEdge {
                nodes: [ids[0], ids[1]],
                tag: el.physical,
            }),
            ELEM_POINT => points.push(TaggedPoint {
                node: ids[0],
                tag: el.physical,
            }),
            _ => unreachable!("element types are filtered while parsing"),
        }
    }

    Mesh::new(nodes, triangles, edges, points, physical_names)
}
