use std::fmt;

/// A line that could not be read as numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: '{}' is not a number", self.line, self.token)
    }
}

/// Reads reals separated by commas and/or newlines.
///
/// Blank lines are skipped. The first non-blank line is treated as a header
/// and dropped when any of its fields fails to parse; a bad field anywhere
/// else is an error.
pub fn parse_reals(text: &str) -> Result<Vec<f64>, ParseError> {
    let mut out = Vec::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim().trim_start_matches('\u{feff}');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: Result<Vec<f64>, ParseError> = fields
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| ParseError {
                    line: i + 1,
                    token: (*f).to_string(),
                })
            })
            .collect();
        match parsed {
            Ok(v) => out.extend(v),
            Err(_) if first => {}
            Err(e) => return Err(e),
        }
        first = false;
    }
    Ok(out)
}
