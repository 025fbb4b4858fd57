//! Text formats: snapshots, traces, tables, and rendered images.
//!
//! Every file opens with `#`-prefixed metadata lines. Snapshots list one
//! `a b` pair per line in lexicographic order; traces and tables are CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::activity::ActivityDistribution;
use crate::cluster::Bounds;
use crate::dynamics::{Addition, GrowthTrace, TraceMode};
use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::influence::{Color, ColoredState, ColoredTrace};
use crate::lattice::{DirectedEdge, Site};

/// Ordered `key: value` metadata written as `# key: value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn new() -> Self {
        Meta::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn write(&self, kind: &str, out: &mut String) {
        let _ = writeln!(out, "# ddla {kind}");
        for (k, v) in &self.0 {
            let _ = writeln!(out, "# {k}: {v}");
        }
    }
}

pub const SNAPSHOT: &str = "snapshot";
pub const TRACE: &str = "trace";
pub const COLORED_TRACE: &str = "colored-trace";

/// Splits leading `#` lines into the file kind and metadata. Returns the
/// 1-based number of the first data line as well.
fn read_header(path: &str, text: &str) -> Result<(String, Meta, usize)> {
    let mut kind = None;
    let mut meta = Meta::new();
    let mut first = 1;
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.strip_prefix('#') else { break };
        let rest = rest.trim();
        first = i + 2;
        if i == 0 {
            kind = rest.strip_prefix("ddla ").map(str::to_string);
            continue;
        }
        if let Some((k, v)) = rest.split_once(':') {
            meta.0.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let kind = kind.ok_or_else(|| parse_error(path, 1, "missing '# ddla <kind>' header line"))?;
    Ok((kind, meta, first))
}

fn parse_error(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, message: message.into() }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- snapshots

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub meta: Meta,
    /// Sorted lexicographically.
    pub sites: Vec<Site>,
}

impl Snapshot {
    pub fn new(meta: Meta, sites: impl IntoIterator<Item = Site>) -> Self {
        let mut sites: Vec<Site> = sites.into_iter().collect();
        sites.sort_unstable();
        sites.dedup();
        Snapshot { meta, sites }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.meta.write(SNAPSHOT, &mut out);
        for p in &self.sites {
            let _ = writeln!(out, "{} {}", p.a, p.b);
        }
        out
    }

    pub fn parse(path: &str, text: &str) -> Result<Self> {
        let (kind, meta, first) = read_header(path, text)?;
        if kind != SNAPSHOT {
            return Err(parse_error(path, 1, format!("expected a snapshot, found {kind:?}")));
        }
        let mut sites = Vec::new();
        for (i, line) in text.lines().enumerate().skip(first - 1) {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_error(path, lineno, format!("expected two integers, found {line:?}")));
            };
            let num = |s: &str| s.parse::<i64>().map_err(|e| parse_error(path, lineno, format!("{s:?}: {e}")));
            sites.push(Site::new(num(a)?, num(b)?));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_error(path, first, "sites are not sorted and distinct"));
        }
        Ok(Snapshot { meta, sites })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&path.display().to_string(), &read_text(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }
}

// ---------------------------------------------------------------- traces

const TRACE_COLUMNS: &str = "event_index,time,site_a,site_b,edge_lower_a,edge_lower_b";
const COLORED_COLUMNS: &str = "event_index,time,site_a,site_b,color";

/// Trace CSV. Initial sites are rows with event index 0 at time 0.
pub fn trace_to_csv(trace: &GrowthTrace, meta: &Meta) -> String {
    let mut out = String::new();
    let meta = meta.clone().with(
        "time_mode",
        match trace.mode {
            TraceMode::Discrete => "discrete",
            TraceMode::Continuous => "continuous",
        },
    );
    meta.with("failed_attempts", trace.failed_attempts).write(TRACE, &mut out);
    out.push_str(TRACE_COLUMNS);
    out.push('\n');
    for p in &trace.initial {
        let _ = writeln!(out, "0,0,{},{},,", p.a, p.b);
    }
    for (i, a) in trace.additions.iter().enumerate() {
        let _ = write!(out, "{},{},{},{},", i + 1, a.time, a.site.a, a.site.b);
        match a.edge {
            Some(e) => {
                let _ = writeln!(out, "{},{}", e.lower.a, e.lower.b);
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

fn csv_rows<'t>(path: &str, text: &'t str, first: usize, columns: &str) -> Result<Vec<(usize, Vec<&'t str>)>> {
    let mut lines = text.lines().enumerate().skip(first - 1).filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == columns => {}
        Some((i, l)) => return Err(parse_error(path, i + 1, format!("expected columns {columns:?}, found {l:?}"))),
        None => return Err(parse_error(path, first, "missing column header")),
    }
    let width = columns.split(',').count();
    lines
        .map(|(i, l)| {
            let cells: Vec<&str> = l.split(',').map(str::trim).collect();
            if cells.len() != width {
                return Err(parse_error(path, i + 1, format!("expected {width} fields, found {}", cells.len())));
            }
            Ok((i + 1, cells))
        })
        .collect()
}

fn field<T: std::str::FromStr>(path: &str, line: usize, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| parse_error(path, line, format!("{s:?}: {e}")))
}

pub fn trace_from_csv(path: &str, text: &str) -> Result<(Meta, GrowthTrace)> {
    let (kind, meta, first) = read_header(path, text)?;
    if kind != TRACE {
        return Err(parse_error(path, 1, format!("expected a trace, found {kind:?}")));
    }
    let mode = match meta.get("time_mode") {
        Some("continuous") => TraceMode::Continuous,
        _ => TraceMode::Discrete,
    };
    let failed_attempts = meta.get("failed_attempts").and_then(|v| v.parse().ok()).unwrap_or(0);
    let mut trace = GrowthTrace { mode, initial: Vec::new(), additions: Vec::new(), failed_attempts };
    for (line, cells) in csv_rows(path, text, first, TRACE_COLUMNS)? {
        let index: usize = field(path, line, cells[0])?;
        let site = Site::new(field(path, line, cells[2])?, field(path, line, cells[3])?);
        if index == 0 {
            trace.initial.push(site);
            continue;
        }
        if index != trace.additions.len() + 1 {
            return Err(parse_error(path, line, format!("event index {index} out of sequence")));
        }
        let edge = match (cells[4], cells[5]) {
            ("", "") => None,
            (a, b) => {
                let lower = Site::new(field(path, line, a)?, field(path, line, b)?);
                Some(DirectedEdge::between(lower, site).ok_or_else(|| {
                    parse_error(path, line, format!("{lower} is not a lower neighbour of {site}"))
                })?)
            }
        };
        trace.additions.push(Addition { time: field(path, line, cells[1])?, site, edge });
    }
    Ok((meta, trace))
}

/// Colored trace CSV. Initial sites are rows with event index 0 at time 0.
pub fn colored_to_csv(trace: &ColoredTrace, meta: &Meta) -> String {
    let mut out = String::new();
    meta.clone().with("window", trace.window).write(COLORED_TRACE, &mut out);
    out.push_str(COLORED_COLUMNS);
    out.push('\n');
    for (set, color) in [(&trace.initial.black, Color::Black), (&trace.initial.red, Color::Red)] {
        for p in set {
            let _ = writeln!(out, "0,0,{},{},{color}", p.a, p.b);
        }
    }
    for (i, e) in trace.events.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{},{}", i + 1, e.time, e.site.a, e.site.b, e.color);
    }
    out
}

/// Reads a colored trace back into its final colored state.
pub fn colored_state_from_csv(path: &str, text: &str) -> Result<(Meta, ColoredState)> {
    let (kind, meta, first) = read_header(path, text)?;
    if kind != COLORED_TRACE {
        return Err(parse_error(path, 1, format!("expected a colored trace, found {kind:?}")));
    }
    let window = meta.get("window").and_then(|w| w.parse().ok()).unwrap_or(0);
    let mut state = ColoredState { window, ..ColoredState::default() };
    for (line, cells) in csv_rows(path, text, first, COLORED_COLUMNS)? {
        let site = Site::new(field(path, line, cells[2])?, field(path, line, cells[3])?);
        match cells[4] {
            "black" => state.black.insert(site),
            "red" => state.red.insert(site),
            other => return Err(parse_error(path, line, format!("unknown color {other:?}"))),
        };
    }
    Ok((meta, state))
}

// ---------------------------------------------------------------- tables

/// A CSV table with a metadata header.
pub fn table_to_csv(kind: &str, meta: &Meta, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    meta.write(kind, &mut out);
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn activity_table(dist: &ActivityDistribution<Dyadic>, meta: &Meta) -> String {
    let rows: Vec<Vec<String>> = dist
        .entries
        .iter()
        .map(|e| {
            vec![
                e.site.a.to_string(),
                e.site.b.to_string(),
                e.multiplicity.to_string(),
                e.escape.numerator().to_string(),
                e.escape.denominator().to_string(),
                e.activity.numerator().to_string(),
                e.activity.denominator().to_string(),
            ]
        })
        .collect();
    table_to_csv(
        "activity",
        meta,
        &["site_a", "site_b", "edge_multiplicity", "escape_num", "escape_den", "activity_num", "activity_den"],
        &rows,
    )
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- rendering

pub const PGM_BLACK: u8 = 0;
pub const PGM_RED: u8 = 128;
pub const PGM_BACKGROUND: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Svg,
}

/// Colored cells in display coordinates: column `d - dmin`, row `hmax - h`.
struct Raster {
    width: usize,
    height: usize,
    cells: Vec<(usize, usize, Color)>,
}

fn raster(state: &ColoredState) -> Raster {
    let all = state.black.iter().chain(&state.red).copied();
    let Some(b) = Bounds::from_sites(all) else {
        return Raster { width: 0, height: 0, cells: Vec::new() };
    };
    let place = |p: &Site| ((b.hmax - p.height()) as usize, (p.deviation() - b.dmin) as usize);
    let mut cells: Vec<(usize, usize, Color)> = state
        .black
        .iter()
        .map(|p| (place(p), Color::Black))
        .chain(state.red.iter().map(|p| (place(p), Color::Red)))
        .map(|((r, c), col)| (r, c, col))
        .collect();
    cells.sort_unstable();
    Raster { width: (b.dmax - b.dmin + 1) as usize, height: (b.hmax - b.hmin + 1) as usize, cells }
}

/// Renders sites in display coordinates (height up, deviation across).
/// Black sites are drawn black, red sites grey (PGM) or red (SVG).
pub fn render(state: &ColoredState, format: ImageFormat) -> String {
    let r = raster(state);
    let mut out = String::new();
    match format {
        ImageFormat::Pgm => {
            let mut pixels = vec![PGM_BACKGROUND; r.width * r.height];
            for &(row, col, c) in &r.cells {
                pixels[row * r.width + col] = if c == Color::Red { PGM_RED } else { PGM_BLACK };
            }
            let _ = writeln!(out, "P2\n{} {}\n255", r.width, r.height);
            for row in pixels.chunks(r.width.max(1)).take(r.height) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        ImageFormat::Svg => {
            const CELL: usize = 4;
            let _ = writeln!(
                out,
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                w = r.width * CELL,
                h = r.height * CELL
            );
            let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
            for &(row, col, c) in &r.cells {
                let fill = if c == Color::Red { "red" } else { "black" };
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{fill}"/>"#,
                    col * CELL,
                    row * CELL
                );
            }
            out.push_str("</svg>\n");
        }
    }
    out
}

/// Number of red pixels in a PGM produced by [`render`].
pub fn pgm_count(pgm: &str, value: u8) -> usize {
    pgm.lines()
        .skip(3)
        .flat_map(|l| l.split_whitespace())
        .filter(|v| v.parse::<u8>().ok() == Some(value))
        .count()
}
