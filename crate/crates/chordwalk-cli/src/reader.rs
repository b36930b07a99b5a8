//! Parsers for the sample files written by `chordwalk sample`.

use std::io::{BufRead, BufReader, Read};

/// One emitted chain point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub chain: u64,
    pub step: u64,
    pub coords: Vec<f64>,
}

/// Header comment of a CSV sample file.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub version: String,
    pub body: String,
    pub algorithm: String,
    pub seed: u64,
}

fn parse_header(line: &str) -> Result<Header, String> {
    // "# chordwalk v<version> body=<descriptor> algorithm=<a> seed=<s>"
    let rest = line
        .strip_prefix("# chordwalk v")
        .ok_or_else(|| format!("not a chordwalk header: {line:?}"))?;
    let mut fields = rest.split_whitespace();
    let version = fields.next().ok_or("missing version")?.to_string();
    let mut body = None;
    let mut algorithm = None;
    let mut seed = None;
    for field in fields {
        match field.split_once('=') {
            Some(("body", v)) => body = Some(v.to_string()),
            Some(("algorithm", v)) => algorithm = Some(v.to_string()),
            Some(("seed", v)) => {
                seed = Some(v.parse::<u64>().map_err(|e| format!("bad seed: {e}"))?)
            }
            _ => return Err(format!("unexpected header field {field:?}")),
        }
    }
    Ok(Header {
        version,
        body: body.ok_or("missing body field")?,
        algorithm: algorithm.ok_or("missing algorithm field")?,
        seed: seed.ok_or("missing seed field")?,
    })
}

/// Reads a CSV sample file: the `# chordwalk ...` comment, the column
/// line, then one row per point.
pub fn read_csv(input: impl Read) -> Result<(Header, Vec<Row>), String> {
    let mut lines = BufReader::new(input).lines();
    let header_line = lines
        .next()
        .ok_or("empty file")?
        .map_err(|e| e.to_string())?;
    let header = parse_header(&header_line)?;
    let columns = lines
        .next()
        .ok_or("missing column line")?
        .map_err(|e| e.to_string())?;
    if !columns.starts_with("chain,step,") {
        return Err(format!("unexpected column line {columns:?}"));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line.map_err(|e| e.to_string())?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let chain = parts
            .next()
            .ok_or("missing chain id")?
            .parse::<u64>()
            .map_err(|e| format!("bad chain id: {e}"))?;
        let step = parts
            .next()
            .ok_or("missing step")?
            .parse::<u64>()
            .map_err(|e| format!("bad step: {e}"))?;
        let coords = parts
            .map(|p| p.parse::<f64>().map_err(|e| format!("bad coordinate {p:?}: {e}")))
            .collect::<Result<Vec<f64>, String>>()?;
        rows.push(Row { chain, step, coords });
    }
    Ok((header, rows))
}

/// Reads a JSONL sample file: one `{"chain":..,"step":..,"coords":[..]}`
/// object per line.
pub fn read_jsonl(input: impl Read) -> Result<Vec<Row>, String> {
    let mut rows = Vec::new();
    for line in BufReader::new(input).lines() {
        let line = line.map_err(|e| e.to_string())?;
        if line.is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| e.to_string())?;
        let chain = value["chain"].as_u64().ok_or("missing chain")?;
        let step = value["step"].as_u64().ok_or("missing step")?;
        let coords = value["coords"]
            .as_array()
            .ok_or("missing coords")?
            .iter()
            .map(|v| v.as_f64().ok_or("non-numeric coordinate"))
            .collect::<Result<Vec<f64>, &str>>()?;
        rows.push(Row { chain, step, coords });
    }
    Ok(rows)
}
