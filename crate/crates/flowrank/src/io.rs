//! Edge-list and ranking file I/O.
//!
//! Edge lists are CSV (UTF-8, LF or CRLF) with configurable columns. Ranking
//! files are one external node ID per line (first line = rank 0); a keyed
//! CSV `node_id,rank` is also accepted on read.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder};
use crate::ranking::Ranking;
use crate::weight::WeightScale;

/// How a column is addressed in the edge-list CSV.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnSpec {
    Name(String),
    Index(usize),
}

impl ColumnSpec {
    /// `"2"` is an index, anything else a name.
    pub fn parse(token: &str) -> ColumnSpec {
        match token.trim().parse::<usize>() {
            Ok(ix) => ColumnSpec::Index(ix),
            Err(_) => ColumnSpec::Name(token.trim().to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// Decide from the first row: a row matching the configured column names
    /// (or whose weight field does not parse) is treated as a header.
    #[default]
    Auto,
    Present,
    Absent,
}

/// Edge-list CSV layout. Defaults: auto-detected header, columns
/// `from,to,weight`, two decimal places of weight precision.
#[derive(Clone, Debug)]
pub struct CsvFormat {
    pub header: HeaderMode,
    pub source: ColumnSpec,
    pub target: ColumnSpec,
    pub weight: ColumnSpec,
    pub scale: WeightScale,
}

impl Default for CsvFormat {
    fn default() -> Self {
        CsvFormat {
            header: HeaderMode::Auto,
            source: ColumnSpec::Name("from".to_string()),
            target: ColumnSpec::Name("to".to_string()),
            weight: ColumnSpec::Name("weight".to_string()),
            scale: WeightScale::default(),
        }
    }
}

impl CsvFormat {
    pub fn with_scale(mut self, scale: WeightScale) -> Self {
        self.scale = scale;
        self
    }

    /// Set all three columns from a `src,tgt,weight` spec string.
    pub fn with_columns(mut self, spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::invalid_input(format!(
                "column spec `{spec}` must have exactly three comma-separated entries"
            )));
        }
        self.source = ColumnSpec::parse(parts[0]);
        self.target = ColumnSpec::parse(parts[1]);
        self.weight = ColumnSpec::parse(parts[2]);
        Ok(self)
    }

    /// Positional fallbacks when no header is present: named columns map to
    /// positions 0, 1, 2 in configuration order.
    fn positional(&self) -> [usize; 3] {
        let pick = |spec: &ColumnSpec, default| match spec {
            ColumnSpec::Index(ix) => *ix,
            ColumnSpec::Name(_) => default,
        };
        [
            pick(&self.source, 0),
            pick(&self.target, 1),
            pick(&self.weight, 2),
        ]
    }

    fn resolve_header(&self, row: &csv::StringRecord) -> Option<[usize; 3]> {
        let find = |spec: &ColumnSpec| match spec {
            ColumnSpec::Index(ix) => (*ix < row.len()).then_some(*ix),
            ColumnSpec::Name(name) => row.iter().position(|field| field == name),
        };
        Some([find(&self.source)?, find(&self.target)?, find(&self.weight)?])
    }
}

fn field<'r>(record: &'r csv::StringRecord, col: usize, line: u64) -> Result<&'r str> {
    record.get(col).ok_or_else(|| {
        Error::parse(
            line,
            format!(
                "wrong column count: need column {} but row has {} fields",
                col + 1,
                record.len()
            ),
        )
    })
}

fn record_line(record: &csv::StringRecord, fallback: u64) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(fallback)
}

/// Load a weighted edge list. Dense indices are assigned in first-appearance
/// order of external IDs; self-loops are dropped (weight recorded); parallel
/// edges are merged by summing; zero-weight rows are kept as edges.
pub fn load_edge_list(source: impl Read, format: &CsvFormat) -> Result<Graph> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut records = reader.records();
    let first = match records.next() {
        None => return Err(Error::NoEdges),
        Some(Err(e)) => return Err(csv_error(e)),
        Some(Ok(record)) => record,
    };
    let first_line = record_line(&first, 1);

    // Header detection.
    let by_name = uses_named_columns(format);
    let header_cols = format.resolve_header(&first);
    let positional = format.positional();
    let (columns, first_is_header) = match format.header {
        HeaderMode::Present => match header_cols {
            Some(cols) => (cols, true),
            None if !by_name => (positional, true),
            None => {
                return Err(Error::parse(
                    first_line,
                    "header row does not contain the configured column names",
                ))
            }
        },
        HeaderMode::Absent => (positional, false),
        HeaderMode::Auto => {
            if by_name && header_cols.is_some() {
                (header_cols.unwrap(), true)
            } else {
                // No name match: treat the row as data if its weight field
                // parses, otherwise there is no sound interpretation.
                let w = field(&first, positional[2], first_line)?;
                if format.scale.parse(w).is_ok() {
                    (positional, false)
                } else if !by_name {
                    (positional, true)
                } else {
                    return Err(Error::parse(
                        first_line,
                        format!(
                            "cannot detect header: first row does not contain the configured \
                             column names and its weight field `{w}` does not parse"
                        ),
                    ));
                }
            }
        }
    };

    let mut builder = GraphBuilder::new(format.scale);
    let mut ingest = |record: &csv::StringRecord, line: u64| -> Result<()> {
        let src = field(record, columns[0], line)?;
        let tgt = field(record, columns[1], line)?;
        let w_text = field(record, columns[2], line)?;
        let weight = format
            .scale
            .parse(w_text)
            .map_err(|msg| Error::parse(line, msg))?;
        builder.add_edge(src, tgt, weight);
        Ok(())
    };

    let mut rows = 0u64;
    if !first_is_header {
        ingest(&first, first_line)?;
        rows += 1;
    }
    for record in records {
        let record = record.map_err(csv_error)?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue; // blank line
        }
        let line = record_line(&record, 0);
        ingest(&record, line)?;
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::NoEdges);
    }
    Ok(builder.finish())
}

/// True when any column is addressed by name.
fn uses_named_columns(format: &CsvFormat) -> bool {
    matches!(format.source, ColumnSpec::Name(_))
        || matches!(format.target, ColumnSpec::Name(_))
        || matches!(format.weight, ColumnSpec::Name(_))
}

fn csv_error(e: csv::Error) -> Error {
    let line = match e.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::parse(line, e.to_string())
}

/// Write the graph back as CSV, rows sorted by (source index, target index),
/// with a header row naming the configured columns. Nodes without any stored
/// edge cannot be represented in an edge list and are omitted.
pub fn write_edge_list(graph: &Graph, format: &CsvFormat, mut out: impl Write) -> Result<()> {
    let name = |spec: &ColumnSpec, default: &str| match spec {
        ColumnSpec::Name(n) => n.clone(),
        ColumnSpec::Index(_) => default.to_string(),
    };
    writeln!(
        out,
        "{},{},{}",
        name(&format.source, "from"),
        name(&format.target, "to"),
        name(&format.weight, "weight")
    )
    .map_err(stream_error)?;
    for (u, v, w) in graph.edges() {
        writeln!(
            out,
            "{},{},{}",
            graph.external_id(u),
            graph.external_id(v),
            format.scale.format(w)
        )
        .map_err(stream_error)?;
    }
    Ok(())
}

fn stream_error(e: std::io::Error) -> Error {
    Error::io("<stream>", e)
}

/// Read a ranking file into the external-ID sequence it lists (rank 0
/// first). Plain format: one ID per line. Keyed format (detected by commas):
/// `node_id,rank` rows in any order, with an optional header.
pub fn read_ranking_ids(source: impl Read) -> Result<Vec<String>> {
    let reader = BufReader::new(source);
    let mut plain: Vec<String> = Vec::new();
    let mut keyed: Vec<(String, u64)> = Vec::new();
    let mut is_keyed: Option<bool> = None;
    for (ix, line) in reader.lines().enumerate() {
        let line_no = ix as u64 + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let keyed_line = line.contains(',');
        match is_keyed {
            None => is_keyed = Some(keyed_line),
            Some(k) if k != keyed_line => {
                return Err(Error::parse(
                    line_no,
                    "mixed ranking formats: both plain and `node_id,rank` lines present",
                ));
            }
            Some(_) => {}
        }
        if keyed_line {
            let (id, rank_text) = line.split_once(',').expect("checked for comma");
            match rank_text.trim().parse::<u64>() {
                Ok(rank) => keyed.push((id.to_string(), rank)),
                Err(_) if ix == 0 => continue, // header row like `node_id,rank`
                Err(_) => {
                    return Err(Error::parse(
                        line_no,
                        format!("unparsable rank `{}`", rank_text.trim()),
                    ))
                }
            }
        } else {
            plain.push(line.to_string());
        }
    }
    if is_keyed == Some(true) {
        keyed.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        for pair in keyed.windows(2) {
            if pair[0].1 == pair[1].1 {
                return Err(Error::invalid_input(format!(
                    "duplicate rank {} (nodes `{}` and `{}`)",
                    pair[0].1, pair[0].0, pair[1].0
                )));
            }
        }
        Ok(keyed.into_iter().map(|(id, _)| id).collect())
    } else {
        Ok(plain)
    }
}

/// Write a ranking in the plain format: one external ID per line, first line
/// = rank 0, LF line endings.
pub fn write_ranking(graph: &Graph, ranking: &Ranking, mut out: impl Write) -> Result<()> {
    for &node in ranking.order() {
        out.write_all(graph.external_id(node).as_bytes())
            .map_err(stream_error)?;
        out.write_all(b"\n").map_err(stream_error)?;
    }
    Ok(())
}
