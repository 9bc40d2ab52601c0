//! Structured item domains: attribute ranges, text templates, the
//! deterministic parser, and random option generation.
//!
//! Generated raw values are quantized to what the template can print
//! (whole minutes, whole dollars, tenths of a km, ...), so rendering and
//! re-parsing recovers them bit-for-bit.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{CoreError, Result};
use crate::types::{FeatureVector, OptionSet};

pub const MIN_SYNTHETIC_DIM: usize = 2;
pub const MAX_SYNTHETIC_DIM: usize = 8;

const KM_PER_MILE: f64 = 1.609344;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Flight,
    Hotel,
    Synthetic,
}

impl std::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Flight => "flight",
            Self::Hotel => "hotel",
            Self::Synthetic => "synthetic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attribute {
    pub name: String,
    /// Raw range mapped onto `[0, 1]`.
    pub lo: f64,
    pub hi: f64,
    pub unit: &'static str,
}

impl Attribute {
    fn new(name: &str, lo: f64, hi: f64, unit: &'static str) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
            unit,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseFailure {
    #[error("empty option text")]
    Empty,
    #[error("missing or malformed attribute `{0}`")]
    Missing(String),
    #[error("attribute `{attribute}` has impossible value {value}")]
    Invalid { attribute: String, value: String },
}

/// A successfully parsed option plus notes about clamped values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOption {
    pub features: FeatureVector,
    pub raw: Vec<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSchema {
    kind: DomainKind,
    attributes: Vec<Attribute>,
}

impl DomainSchema {
    /// Departure time and duration in hours, stops, price in USD.
    pub fn flight() -> Self {
        Self {
            kind: DomainKind::Flight,
            attributes: vec![
                Attribute::new("departure_time", 6.0, 22.0, "hour of day"),
                Attribute::new("duration", 0.5, 20.0, "hours"),
                Attribute::new("stops", 0.0, 2.0, "count"),
                Attribute::new("price", 100.0, 1000.0, "USD"),
            ],
        }
    }

    /// Distance in km, nightly price in USD, star rating, amenity count.
    pub fn hotel() -> Self {
        Self {
            kind: DomainKind::Hotel,
            attributes: vec![
                Attribute::new("distance", 0.5, 20.0, "km"),
                Attribute::new("price", 50.0, 500.0, "USD per night"),
                Attribute::new("rating", 1.0, 5.0, "stars"),
                Attribute::new("amenities", 0.0, 10.0, "count"),
            ],
        }
    }

    /// `d` unitless attributes already on `[0, 1]`.
    pub fn synthetic(d: usize) -> Result<Self> {
        if !(MIN_SYNTHETIC_DIM..=MAX_SYNTHETIC_DIM).contains(&d) {
            return Err(CoreError::InvalidConfig {
                field: "d",
                reason: format!("synthetic domain supports d in [{MIN_SYNTHETIC_DIM}, {MAX_SYNTHETIC_DIM}], got {d}"),
            });
        }
        Ok(Self {
            kind: DomainKind::Synthetic,
            attributes: (1..=d)
                .map(|j| Attribute::new(&format!("attr_{j}"), 0.0, 1.0, "unitless"))
                .collect(),
        })
    }

    /// `d` is only consulted (and required) for the synthetic domain.
    pub fn from_kind(kind: DomainKind, d: Option<usize>) -> Result<Self> {
        match kind {
            DomainKind::Flight => Ok(Self::flight()),
            DomainKind::Hotel => Ok(Self::hotel()),
            DomainKind::Synthetic => Self::synthetic(d.ok_or(CoreError::InvalidConfig {
                field: "d",
                reason: "synthetic domain needs a dimensionality".into(),
            })?),
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn item_noun(&self) -> &'static str {
        match self.kind {
            DomainKind::Flight => "flight",
            DomainKind::Hotel => "hotel",
            DomainKind::Synthetic => "item",
        }
    }

    /// Maps raw values to `[0, 1]`, clamping out-of-range values and
    /// describing each clamp in the returned notes.
    pub fn normalize_raw(&self, raw: &[f64]) -> (Vec<f64>, Vec<String>) {
        assert_eq!(raw.len(), self.dim(), "raw attribute count mismatch");
        let mut notes = Vec::new();
        let values = self
            .attributes
            .iter()
            .zip(raw)
            .map(|(a, &v)| {
                if v < a.lo || v > a.hi {
                    notes.push(format!(
                        "{} = {v} outside [{}, {}] {}; clamped",
                        a.name, a.lo, a.hi, a.unit
                    ));
                }
                ((v.clamp(a.lo, a.hi) - a.lo) / (a.hi - a.lo)).clamp(0.0, 1.0)
            })
            .collect();
        (values, notes)
    }

    /// Draws raw values uniformly over each range at template resolution.
    pub fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.kind {
            DomainKind::Flight => vec![
                rng.random_range(360u32..=1320) as f64 / 60.0,
                rng.random_range(30u32..=1200) as f64 / 60.0,
                rng.random_range(0u32..=2) as f64,
                rng.random_range(100u32..=1000) as f64,
            ],
            DomainKind::Hotel => vec![
                rng.random_range(5u32..=200) as f64 / 10.0,
                rng.random_range(50u32..=500) as f64,
                rng.random_range(1u32..=5) as f64,
                rng.random_range(0u32..=10) as f64,
            ],
            DomainKind::Synthetic => (0..self.dim()).map(|_| rng.random::<f64>()).collect(),
        }
    }

    /// Renders option `index` (1-based, as shown to users) from raw values.
    pub fn render(&self, index: usize, raw: &[f64]) -> String {
        assert_eq!(raw.len(), self.dim(), "raw attribute count mismatch");
        match self.kind {
            DomainKind::Flight => {
                let departure = (raw[0] * 60.0).round() as u32;
                let (hour24, minute) = (departure / 60, departure % 60);
                let suffix = if hour24 >= 12 { "PM" } else { "AM" };
                let hour12 = match hour24 % 12 {
                    0 => 12,
                    h => h,
                };
                let duration = (raw[1] * 60.0).round() as u32;
                format!(
                    "Flight {index}: Departure time: {hour12:02}:{minute:02} {suffix}, Duration: {}hr {}min, \
                     Number of stops: {}, Price: ${}",
                    duration / 60,
                    duration % 60,
                    raw[2] as u32,
                    raw[3] as u32
                )
            }
            DomainKind::Hotel => format!(
                "Hotel {index}: Distance to downtown: {:.1} km, Price: ${}/night, Rating: {} stars, Amenities: {}",
                raw[0], raw[1] as u32, raw[2] as u32, raw[3] as u32
            ),
            DomainKind::Synthetic => {
                let mut s = format!("Item {index}:");
                for (j, v) in raw.iter().enumerate() {
                    let sep = if j == 0 { " " } else { ", " };
                    write!(s, "{sep}attr_{}: {v}", j + 1).expect("write to String");
                }
                s
            }
        }
    }

    pub fn parse_option(&self, text: &str) -> std::result::Result<ParsedOption, ParseFailure> {
        if text.trim().is_empty() {
            return Err(ParseFailure::Empty);
        }
        let raw = match self.kind {
            DomainKind::Flight => parse_flight(text)?,
            DomainKind::Hotel => parse_hotel(text)?,
            DomainKind::Synthetic => parse_synthetic(text, self.dim())?,
        };
        let (values, notes) = self.normalize_raw(&raw);
        for note in &notes {
            log::info!("{note}");
        }
        let features = FeatureVector::new(values).expect("normalized values lie in [0, 1]");
        Ok(ParsedOption { features, raw, notes })
    }

    /// Parses every text; `None` if any one of them fails.
    pub fn parse_option_set(&self, texts: &[String]) -> Option<OptionSet> {
        let mut features = Vec::with_capacity(texts.len());
        for text in texts {
            match self.parse_option(text) {
                Ok(parsed) => features.push(parsed.features),
                Err(err) => {
                    log::debug!("option parse failed: {err}");
                    return None;
                }
            }
        }
        OptionSet::new(features, texts.to_vec()).ok()
    }

    pub fn generate_option_set<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> OptionSet {
        assert!(k >= 2, "need at least two options");
        let mut features = Vec::with_capacity(k);
        let mut texts = Vec::with_capacity(k);
        for i in 1..=k {
            let raw = self.sample_raw(rng);
            texts.push(self.render(i, &raw));
            let (values, _) = self.normalize_raw(&raw);
            features.push(FeatureVector::new(values).expect("generated values are in range"));
        }
        OptionSet::new(features, texts).expect("generated option set is well formed")
    }
}

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static pattern compiles"))
}

fn missing(name: &str) -> ParseFailure {
    ParseFailure::Missing(name.into())
}

fn number(s: &str, name: &str) -> std::result::Result<f64, ParseFailure> {
    let v: f64 = s.replace(',', "").parse().map_err(|_| ParseFailure::Invalid {
        attribute: name.into(),
        value: s.into(),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseFailure::Invalid {
            attribute: name.into(),
            value: s.into(),
        })
    }
}

fn parse_price(text: &str) -> std::result::Result<f64, ParseFailure> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = regex(&RE, r"(?i)\bprice:\s*\$\s*(\d[\d,]*(?:\.\d+)?)");
    let caps = re.captures(text).ok_or_else(|| missing("price"))?;
    number(&caps[1], "price")
}

fn parse_flight(text: &str) -> std::result::Result<Vec<f64>, ParseFailure> {
    static DEPARTURE: OnceLock<Regex> = OnceLock::new();
    static DURATION: OnceLock<Regex> = OnceLock::new();
    static STOPS: OnceLock<Regex> = OnceLock::new();

    let caps = regex(&DEPARTURE, r"(?i)departure time:\s*(\d{1,2}):(\d{2})\s*([ap])\.?m\.?")
        .captures(text)
        .ok_or_else(|| missing("departure time"))?;
    let hour: u32 = caps[1].parse().map_err(|_| missing("departure time"))?;
    let minute: u32 = caps[2].parse().map_err(|_| missing("departure time"))?;
    if !(1..=12).contains(&hour) || minute >= 60 {
        return Err(ParseFailure::Invalid {
            attribute: "departure time".into(),
            value: format!("{}:{}", &caps[1], &caps[2]),
        });
    }
    let pm = caps[3].eq_ignore_ascii_case("p");
    let hour24 = hour % 12 + if pm { 12 } else { 0 };
    let departure = (hour24 * 60 + minute) as f64 / 60.0;

    let caps = regex(
        &DURATION,
        r"(?i)duration:\s*(?:(\d+)\s*(?:hours?|hrs?|h)\b\s*)?(?:(\d+)\s*(?:minutes?|mins?|m)\b)?",
    )
    .captures(text)
    .ok_or_else(|| missing("duration"))?;
    let (hours, minutes) = (caps.get(1), caps.get(2));
    if hours.is_none() && minutes.is_none() {
        return Err(missing("duration"));
    }
    let as_u32 = |m: Option<regex::Match<'_>>| m.map_or(Ok(0u32), |m| m.as_str().parse::<u32>());
    let total = as_u32(hours)
        .and_then(|h| as_u32(minutes).map(|m| h * 60 + m))
        .map_err(|_| missing("duration"))?;
    let duration = total as f64 / 60.0;

    let caps = regex(&STOPS, r"(?i)number of stops:\s*(\d+)")
        .captures(text)
        .ok_or_else(|| missing("number of stops"))?;
    let stops = number(&caps[1], "number of stops")?;

    Ok(vec![departure, duration, stops, parse_price(text)?])
}

fn parse_hotel(text: &str) -> std::result::Result<Vec<f64>, ParseFailure> {
    static DISTANCE: OnceLock<Regex> = OnceLock::new();
    static RATING: OnceLock<Regex> = OnceLock::new();
    static AMENITIES: OnceLock<Regex> = OnceLock::new();
    static LIST_SEP: OnceLock<Regex> = OnceLock::new();

    let caps = regex(
        &DISTANCE,
        r"(?i)distance to downtown:\s*(\d+(?:\.\d+)?)\s*(km|kilometers?|kilometres?|mi|miles?)\b",
    )
    .captures(text)
    .ok_or_else(|| missing("distance to downtown"))?;
    let mut distance = number(&caps[1], "distance to downtown")?;
    if caps[2].to_ascii_lowercase().starts_with('m') {
        distance *= KM_PER_MILE;
    }

    let price = parse_price(text)?;

    let caps = regex(&RATING, r"(?i)rating:\s*(\d+(?:\.\d+)?)\s*stars?")
        .captures(text)
        .ok_or_else(|| missing("rating"))?;
    let rating = number(&caps[1], "rating")?;

    let caps = regex(&AMENITIES, r"(?i)amenities:\s*([^\n]*?)\s*\.?\s*$")
        .captures(text)
        .ok_or_else(|| missing("amenities"))?;
    let listed = caps[1].trim();
    if listed.is_empty() {
        return Err(missing("amenities"));
    }
    let amenities = if listed.chars().all(|c| c.is_ascii_digit()) {
        number(listed, "amenities")?
    } else if listed.eq_ignore_ascii_case("none") {
        0.0
    } else {
        let sep = regex(&LIST_SEP, r"(?i),\s*(?:and\s+)?|\s+and\s+");
        sep.split(listed).filter(|item| !item.trim().is_empty()).count() as f64
    };

    Ok(vec![distance, price, rating, amenities])
}

fn parse_synthetic(text: &str, d: usize) -> std::result::Result<Vec<f64>, ParseFailure> {
    static ATTR: OnceLock<Regex> = OnceLock::new();
    let re = regex(&ATTR, r"(?i)attr_(\d+):\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:e[-+]?\d+)?)");
    let mut values: Vec<Option<f64>> = vec![None; d];
    for caps in re.captures_iter(text) {
        let j: usize = caps[1].parse().unwrap_or(0);
        if (1..=d).contains(&j) {
            values[j - 1] = Some(number(&caps[2], &format!("attr_{j}"))?);
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(j, v)| v.ok_or_else(|| missing(&format!("attr_{}", j + 1))))
        .collect()
}
