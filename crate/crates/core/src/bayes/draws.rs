use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::WeibullGrowthParams;

/// Samples from the posterior of θ, used as the pre-posterior for planning.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    draws: Vec<WeibullGrowthParams>,
    provenance: String,
}

impl PosteriorDraws {
    pub fn new(draws: Vec<WeibullGrowthParams>, provenance: impl Into<String>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::EmptyDraws);
        }
        Ok(Self {
            draws,
            provenance: provenance.into(),
        })
    }

    /// A single draw; handy for point-mass checks.
    pub fn point_mass(theta: WeibullGrowthParams) -> Self {
        Self {
            draws: vec![theta],
            provenance: "point mass".into(),
        }
    }

    pub fn draws(&self) -> &[WeibullGrowthParams] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Component-wise median.
    pub fn median(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut v: Vec<f64> = self.draws.iter().map(|d| d.as_array()[k]).collect();
            v.sort_by(f64::total_cmp);
            let n = v.len();
            *slot = if n % 2 == 1 {
                v[n / 2]
            } else {
                0.5 * (v[n / 2 - 1] + v[n / 2])
            };
        }
        out
    }
}

#[derive(Deserialize)]
struct DrawRow {
    theta1: f64,
    theta2: f64,
    theta3: f64,
}

/// Reads a draws CSV with header `theta1,theta2,theta3`.
///
/// Lines starting with `#` are comments; the first one is kept as the
/// provenance string.
pub fn load_draws(csv_text: &str) -> Result<PosteriorDraws> {
    const SRC: &str = "draws";
    let provenance = csv_text
        .lines()
        .find_map(|l| l.strip_prefix('#'))
        .map(|s| s.trim().to_string())
        .unwrap_or_default();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(SRC, 1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["theta1", "theta2", "theta3"] {
        return Err(Error::parse(
            SRC,
            headers.position().map_or(1, csv::Position::line),
            "expected header `theta1,theta2,theta3`",
        ));
    }
    let mut draws = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            Error::parse(
                SRC,
                e.position().map_or(0, csv::Position::line),
                e.to_string(),
            )
        })?;
        let line = rec.position().map_or(0, csv::Position::line);
        let row: DrawRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(SRC, line, e.to_string()))?;
        let theta = WeibullGrowthParams::new(row.theta1, row.theta2, row.theta3)
            .map_err(|e| Error::parse(SRC, line, e.to_string()))?;
        draws.push(theta);
    }
    PosteriorDraws::new(draws, provenance)
}

/// Writes draws in the format read by [`load_draws`]. Values use the
/// shortest representation that round-trips exactly.
pub fn save_draws(draws: &PosteriorDraws) -> String {
    let mut out = String::new();
    if !draws.provenance.is_empty() {
        out.push_str("# ");
        out.push_str(&draws.provenance.replace(['\n', '\r'], " "));
        out.push('\n');
    }
    out.push_str("theta1,theta2,theta3\n");
    for d in &draws.draws {
        let [a, b, c] = d.as_array();
        out.push_str(&format!("{a},{b},{c}\n"));
    }
    out
}
