//! Post records, corpus parsing, noise filtering, and keyword / calendar slicing.
//!
//! Input is line-delimited JSON, one post per line:
//!
//! ```text
//! {"id":"1","created_at":"2015-03-01T12:00:00Z","lon":-117.07,"lat":32.77,"text":"go sdsu","source":"Twitter for iPhone","platform":"Twitter"}
//! ```
//!
//! `platform` is optional and defaults to `Other`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Datelike, NaiveDateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Platform {
    Twitter,
    Weibo,
    Other,
}

impl Platform {
    pub fn parse(s: &str) -> Platform {
        match s.trim().to_lowercase().as_str() {
            "twitter" => Platform::Twitter,
            "weibo" | "sina weibo" | "sina_weibo" => Platform::Weibo,
            _ => Platform::Other,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Platform::Twitter => "Twitter",
            Platform::Weibo => "Weibo",
            Platform::Other => "Other",
        }
    }
}

/// One geo-tagged microblog record.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPost {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub lon: f64,
    pub lat: f64,
    pub text: String,
    pub source: String,
    pub platform: Platform,
}

#[derive(Serialize)]
struct PostLine<'a> {
    id: &'a str,
    created_at: String,
    lon: f64,
    lat: f64,
    text: &'a str,
    source: &'a str,
    platform: &'static str,
}

impl GeoPost {
    pub fn new(
        id: impl Into<String>,
        timestamp: DateTime<Utc>,
        lon: f64,
        lat: f64,
        text: impl Into<String>,
        source: impl Into<String>,
        platform: Platform,
    ) -> Result<Self> {
        let post = Self {
            id: id.into(),
            timestamp: timestamp.trunc_subsecs(0),
            lon,
            lat,
            text: text.into(),
            source: source.into(),
            platform,
        };
        post.validate()?;
        Ok(post)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidPost("empty id".into()));
        }
        if !valid_lon(self.lon) || !valid_lat(self.lat) {
            return Err(Error::CoordinateOutOfRange {
                lon: self.lon,
                lat: self.lat,
            });
        }
        Ok(())
    }

    /// Serializes to one line of the input format (no trailing newline).
    pub fn to_json_line(&self) -> String {
        let line = PostLine {
            id: &self.id,
            created_at: format_timestamp(&self.timestamp),
            lon: self.lon,
            lat: self.lat,
            text: &self.text,
            source: &self.source,
            platform: self.platform.as_str(),
        };
        serde_json::to_string(&line).expect("post serialization cannot fail")
    }
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

pub(crate) fn valid_lon(lon: f64) -> bool {
    lon.is_finite() && (-180.0..=180.0).contains(&lon)
}

pub(crate) fn valid_lat(lat: f64) -> bool {
    lat.is_finite() && (-90.0..=90.0).contains(&lat)
}

/// Parses an ISO-8601 instant. Offsets are converted to UTC; naive times are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc).trunc_subsecs(0));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
    ] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(naive.and_utc().trunc_subsecs(0));
        }
    }
    None
}

fn parse_line(line: &str, line_no: usize) -> Result<GeoPost> {
    let err = |field: &str, reason: &str| Error::Parse {
        line: line_no,
        field: field.to_string(),
        reason: reason.to_string(),
    };
    let value: Value = serde_json::from_str(line).map_err(|e| err("<record>", &e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| err("<record>", "not a JSON object"))?;

    let string_field = |name: &str| -> Result<String> {
        match obj.get(name) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(err(name, "expected a string")),
            None => Err(err(name, "missing")),
        }
    };
    let number_field = |name: &str| -> Result<f64> {
        match obj.get(name) {
            Some(Value::Number(n)) => n.as_f64().ok_or_else(|| err(name, "not representable")),
            Some(_) => Err(err(name, "expected a number")),
            None => Err(err(name, "missing")),
        }
    };

    let id = string_field("id")?;
    if id.is_empty() {
        return Err(err("id", "empty"));
    }
    let created_at = string_field("created_at")?;
    let timestamp =
        parse_timestamp(&created_at).ok_or_else(|| err("created_at", "not an ISO-8601 instant"))?;
    let lon = number_field("lon")?;
    if !valid_lon(lon) {
        return Err(err("lon", "outside [-180, 180]"));
    }
    let lat = number_field("lat")?;
    if !valid_lat(lat) {
        return Err(err("lat", "outside [-90, 90]"));
    }
    let text = string_field("text")?;
    let source = string_field("source")?;
    let platform = match obj.get("platform") {
        None | Some(Value::Null) => Platform::Other,
        Some(Value::String(s)) => Platform::parse(s),
        Some(_) => return Err(err("platform", "expected a string")),
    };

    Ok(GeoPost {
        id,
        timestamp,
        lon,
        lat,
        text,
        source,
        platform,
    })
}

/// Parses post lines. Blank lines are skipped. In lenient mode malformed lines are
/// counted and dropped; in strict mode the first one aborts with its line number.
pub fn parse_posts<I, S>(lines: I, strict: bool) -> Result<(Vec<GeoPost>, usize)>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut posts = Vec::new();
    let mut malformed = 0;
    for (idx, line) in lines.into_iter().enumerate() {
        let line = line.as_ref().trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line, idx + 1) {
            Ok(p) => posts.push(p),
            Err(e) if strict => return Err(e),
            Err(e) => {
                log::debug!("skipping malformed record: {e}");
                malformed += 1;
            }
        }
    }
    Ok((posts, malformed))
}

/// Longitude/latitude rectangle, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl GeoBBox {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Result<Self> {
        let b = Self {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let ranges_ok = valid_lon(self.min_lon)
            && valid_lon(self.max_lon)
            && valid_lat(self.min_lat)
            && valid_lat(self.max_lat);
        if !ranges_ok || self.min_lon >= self.max_lon || self.min_lat >= self.max_lat {
            return Err(Error::DegenerateBbox(format!(
                "lon [{}, {}], lat [{}, {}]",
                self.min_lon, self.max_lon, self.min_lat, self.max_lat
            )));
        }
        Ok(())
    }

    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        lon >= self.min_lon && lon <= self.max_lon && lat >= self.min_lat && lat <= self.max_lat
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.min_lon + self.max_lon),
            0.5 * (self.min_lat + self.max_lat),
        )
    }

    /// Parses `min_lon,min_lat,max_lon,max_lat`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("bbox `{s}`: {e}")))?;
        match parts.as_slice() {
            [a, b, c, d] => Self::new(*a, *b, *c, *d),
            _ => Err(Error::Config(format!("bbox `{s}` needs four numbers"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseReason {
    OutsideBbox,
    BlockedSource,
    Malformed,
    Duplicate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasonCounts {
    pub outside_bbox: u64,
    pub blocked_source: u64,
    pub malformed: u64,
    pub duplicate: u64,
}

impl ReasonCounts {
    pub fn total(&self) -> u64 {
        self.outside_bbox + self.blocked_source + self.malformed + self.duplicate
    }

    fn bump(&mut self, reason: NoiseReason) {
        match reason {
            NoiseReason::OutsideBbox => self.outside_bbox += 1,
            NoiseReason::BlockedSource => self.blocked_source += 1,
            NoiseReason::Malformed => self.malformed += 1,
            NoiseReason::Duplicate => self.duplicate += 1,
        }
    }
}

/// Counts describing how much of a corpus was discarded as noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub original_count: u64,
    pub noise_count: u64,
    pub final_count: u64,
    /// Percentage truncated (not rounded) to two decimals, matching how the
    /// published corpus statistics were reported.
    pub noise_percentage: f64,
    #[serde(flatten)]
    pub reasons: ReasonCounts,
}

impl NoiseReport {
    pub fn from_counts(original_count: u64, reasons: ReasonCounts) -> Result<Self> {
        let noise_count = reasons.total();
        if noise_count > original_count {
            return Err(Error::param(
                "noise_count",
                format!("{noise_count} exceeds original count {original_count}"),
            ));
        }
        Ok(Self {
            original_count,
            noise_count,
            final_count: original_count - noise_count,
            noise_percentage: noise_percentage(noise_count, original_count),
            reasons,
        })
    }

    /// Folds lines rejected by the parser into the report.
    pub fn with_malformed(self, malformed: u64) -> Self {
        let mut reasons = self.reasons;
        reasons.malformed += malformed;
        Self::from_counts(self.original_count + malformed, reasons)
            .expect("adding malformed lines keeps counts consistent")
    }
}

/// `100 * noise / original`, truncated to two decimals; 0 for an empty corpus.
pub fn noise_percentage(noise: u64, original: u64) -> f64 {
    if original == 0 {
        return 0.0;
    }
    let basis_points = (noise as u128 * 10_000) / original as u128;
    basis_points as f64 / 100.0
}

/// Normalizes a client-application string: trims, lowercases, and unwraps an
/// HTML anchor such as `<a href="...">Twitter for iPhone</a>`.
pub fn source_label(source: &str) -> String {
    let s = source.trim();
    if s.starts_with("<a") {
        if let (Some(open), Some(close)) = (s.find('>'), s.rfind("</a>")) {
            if open < close {
                return s[open + 1..close].trim().to_lowercase();
            }
        }
    }
    s.to_lowercase()
}

/// Removes posts outside `bbox`, posts from blocked sources, and repeated ids
/// (the first occurrence wins). Invalid records count as `Malformed`.
pub fn filter_noise(
    posts: &[GeoPost],
    bbox: &GeoBBox,
    blocked_sources: &HashSet<String>,
) -> Result<(Vec<GeoPost>, NoiseReport)> {
    bbox.validate()?;
    let blocked: HashSet<String> = blocked_sources.iter().map(|s| source_label(s)).collect();
    let mut seen: HashSet<&str> = HashSet::with_capacity(posts.len());
    let mut kept = Vec::with_capacity(posts.len());
    let mut reasons = ReasonCounts::default();

    for post in posts {
        let reason = if post.validate().is_err() {
            Some(NoiseReason::Malformed)
        } else if !bbox.contains(post.lon, post.lat) {
            Some(NoiseReason::OutsideBbox)
        } else if !blocked.is_empty() && blocked.contains(&source_label(&post.source)) {
            Some(NoiseReason::BlockedSource)
        } else if !seen.insert(post.id.as_str()) {
            Some(NoiseReason::Duplicate)
        } else {
            None
        };
        match reason {
            Some(r) => reasons.bump(r),
            None => kept.push(post.clone()),
        }
    }

    let report = NoiseReport::from_counts(posts.len() as u64, reasons)?;
    Ok((kept, report))
}

/// A place name plus spelling variants, matched case-insensitively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceQuery {
    pub canonical_name: String,
    pub aliases: Vec<String>,
}

impl PlaceQuery {
    pub fn new<S: Into<String>>(
        canonical_name: impl Into<String>,
        aliases: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let canonical_name = canonical_name.into();
        if canonical_name.trim().is_empty() {
            return Err(Error::param("canonical_name", "empty"));
        }
        let mut seen: HashSet<String> = HashSet::new();
        seen.insert(canonical_name.to_lowercase());
        let mut kept = Vec::new();
        for alias in aliases {
            let alias: String = alias.into();
            if alias.trim().is_empty() {
                continue;
            }
            if seen.insert(alias.to_lowercase()) {
                kept.push(alias);
            }
        }
        Ok(Self {
            canonical_name,
            aliases: kept,
        })
    }

    /// Case-folded canonical name followed by case-folded aliases.
    pub fn needles(&self) -> Vec<String> {
        std::iter::once(&self.canonical_name)
            .chain(self.aliases.iter())
            .map(|s| s.to_lowercase())
            .collect()
    }

    pub fn matches(&self, text: &str) -> bool {
        let folded = text.to_lowercase();
        self.needles().iter().any(|n| folded.contains(n.as_str()))
    }
}

/// Posts mentioning the place, in input order.
pub fn query_keyword(posts: &[GeoPost], query: &PlaceQuery) -> Vec<GeoPost> {
    let needles = query.needles();
    posts
        .iter()
        .filter(|p| {
            let folded = p.text.to_lowercase();
            needles.iter().any(|n| folded.contains(n.as_str()))
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Spring,
    Summer,
    Fall,
    Winter,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Spring, Season::Summer, Season::Fall, Season::Winter];

    pub fn next(self) -> Season {
        match self {
            Season::Spring => Season::Summer,
            Season::Summer => Season::Fall,
            Season::Fall => Season::Winter,
            Season::Winter => Season::Spring,
        }
    }

    pub fn from_month(month: u32) -> Season {
        match month {
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            9..=11 => Season::Fall,
            _ => Season::Winter,
        }
    }

    pub fn parse(s: &str) -> Result<Season> {
        match s.trim().to_lowercase().as_str() {
            "spring" => Ok(Season::Spring),
            "summer" => Ok(Season::Summer),
            "fall" | "autumn" => Ok(Season::Fall),
            "winter" => Ok(Season::Winter),
            other => Err(Error::Config(format!("unknown season `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Fall => "fall",
            Season::Winter => "winter",
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn assign_season(timestamp: &DateTime<Utc>) -> Season {
    Season::from_month(timestamp.month())
}

/// A season within a particular year; winter carries the year it starts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeasonKey {
    pub year: i32,
    pub season: Season,
}

impl fmt::Display for SeasonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.season, self.year)
    }
}

pub fn season_key(timestamp: &DateTime<Utc>) -> SeasonKey {
    let season = assign_season(timestamp);
    let year = if season == Season::Winter && timestamp.month() <= 2 {
        timestamp.year() - 1
    } else {
        timestamp.year()
    };
    SeasonKey { year, season }
}

pub fn slice_by_month(posts: &[GeoPost]) -> BTreeMap<(i32, u32), Vec<GeoPost>> {
    let mut out: BTreeMap<(i32, u32), Vec<GeoPost>> = BTreeMap::new();
    for p in posts {
        out.entry((p.timestamp.year(), p.timestamp.month()))
            .or_default()
            .push(p.clone());
    }
    out
}

/// Pools every year's posts by season.
pub fn slice_by_season(posts: &[GeoPost]) -> BTreeMap<Season, Vec<GeoPost>> {
    let mut out: BTreeMap<Season, Vec<GeoPost>> = BTreeMap::new();
    for p in posts {
        out.entry(assign_season(&p.timestamp))
            .or_default()
            .push(p.clone());
    }
    out
}

pub fn slice_by_season_key(posts: &[GeoPost]) -> BTreeMap<SeasonKey, Vec<GeoPost>> {
    let mut out: BTreeMap<SeasonKey, Vec<GeoPost>> = BTreeMap::new();
    for p in posts {
        out.entry(season_key(&p.timestamp))
            .or_default()
            .push(p.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn ts(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 12, 0, 0).unwrap()
    }

    fn post(id: &str, lon: f64, lat: f64, text: &str) -> GeoPost {
        GeoPost::new(
            id,
            ts(2015, 6, 2),
            lon,
            lat,
            text,
            "Twitter for iPhone",
            Platform::Twitter,
        )
        .unwrap()
    }

    const LINE: &str = r#"{"id":"a","created_at":"2015-03-01T08:00:00Z","lon":-117.07,"lat":32.77,"text":"go sdsu","source":"web"}"#;

    #[test]
    fn parses_valid_lines() {
        let lines = [LINE, LINE, LINE];
        let (posts, bad) = parse_posts(lines, true).unwrap();
        assert_eq!(posts.len(), 3);
        assert_eq!(bad, 0);
        assert_eq!(posts[0].platform, Platform::Other);
        assert_eq!(
            posts[0].timestamp,
            Utc.with_ymd_and_hms(2015, 3, 1, 8, 0, 0).unwrap()
        );
    }

    #[test]
    fn lenient_counts_missing_lat() {
        let missing = r#"{"id":"b","created_at":"2015-03-01T08:00:00Z","lon":-117.0,"text":"x","source":"web"}"#;
        let (posts, bad) = parse_posts([LINE, missing, LINE], false).unwrap();
        assert_eq!(posts.len(), 2);
        assert_eq!(bad, 1);
    }

    #[test]
    fn strict_reports_line_and_field() {
        let bad_lat = r#"{"id":"c","created_at":"2015-03-01T08:00:00Z","lon":-117.0,"lat":95.0,"text":"x","source":"web"}"#;
        match parse_posts([LINE, bad_lat], true) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "lat");
            }
            other => panic!("unexpected {other:?}"),
        }
        let (posts, bad) = parse_posts([bad_lat], false).unwrap();
        assert!(posts.is_empty());
        assert_eq!(bad, 1);
    }

    #[test]
    fn offsets_convert_to_utc() {
        let t = parse_timestamp("2015-03-01T01:30:00+08:00").unwrap();
        assert_eq!(t, Utc.with_ymd_and_hms(2015, 2, 28, 17, 30, 0).unwrap());
        assert!(parse_timestamp("yesterday").is_none());
    }

    #[test]
    fn json_line_round_trips() {
        let p = post("r1", -117.1, 32.7, "hello \"world\" 天安门");
        let (back, bad) = parse_posts([p.to_json_line()], true).unwrap();
        assert_eq!(bad, 0);
        assert_eq!(back[0], p);
    }

    #[test]
    fn table2_arithmetic() {
        let twitter = NoiseReport::from_counts(
            7_619_307,
            ReasonCounts {
                blocked_source: 864_477,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(twitter.final_count, 6_754_830);
        assert_eq!(twitter.noise_percentage, 11.34);

        let weibo = NoiseReport::from_counts(11_951_385, ReasonCounts::default()).unwrap();
        assert_eq!(weibo.final_count, 11_951_385);
        assert_eq!(weibo.noise_percentage, 0.0);
        assert_eq!(noise_percentage(0, 0), 0.0);
    }

    #[test]
    fn filter_removes_each_kind() {
        let bbox = GeoBBox::new(-118.0, 32.0, -116.0, 34.0).unwrap();
        let mut blocked_post = post("b", -117.0, 33.0, "ad");
        blocked_post.source = r#"<a href="http://x">Spam Bot</a>"#.into();
        let posts = vec![
            post("a", -117.0, 33.0, "ok"),
            post("o", -100.0, 33.0, "far"),
            blocked_post,
            post("a", -117.0, 33.0, "ok again"),
        ];
        let blocked: HashSet<String> = ["spam bot".to_string()].into_iter().collect();
        let (kept, report) = filter_noise(&posts, &bbox, &blocked).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(report.reasons.outside_bbox, 1);
        assert_eq!(report.reasons.blocked_source, 1);
        assert_eq!(report.reasons.duplicate, 1);
        assert_eq!(report.noise_count, 3);
        assert_eq!(report.noise_percentage, 75.0);
    }

    #[test]
    fn filter_single_post_is_identity() {
        let bbox = GeoBBox::new(-118.0, 32.0, -116.0, 34.0).unwrap();
        let posts = vec![post("a", -117.0, 33.0, "ok")];
        let (kept, report) = filter_noise(&posts, &bbox, &HashSet::new()).unwrap();
        assert_eq!(kept, posts);
        assert_eq!(report.noise_percentage, 0.0);
    }

    #[test]
    fn degenerate_bbox_rejected() {
        assert!(GeoBBox::new(-117.0, 32.0, -117.0, 33.0).is_err());
        let bad = GeoBBox {
            min_lon: 1.0,
            min_lat: 1.0,
            max_lon: 0.0,
            max_lat: 2.0,
        };
        assert!(filter_noise(&[], &bad, &HashSet::new()).is_err());
    }

    #[test]
    fn keyword_matching_rules() {
        let sdsu = PlaceQuery::new("SDSU", Vec::<String>::new()).unwrap();
        assert!(sdsu.matches("go sdsu!"));
        let sea = PlaceQuery::new("Sea World", ["seaworld", "SeaWorld"]).unwrap();
        assert_eq!(sea.aliases, vec!["seaworld".to_string()]);
        assert!(sea.matches("seaworld rocks"));
        let uni = PlaceQuery::new("university", Vec::<String>::new()).unwrap();
        assert!(!uni.matches("universe"));
        assert!(PlaceQuery::new("  ", Vec::<String>::new()).is_err());
    }

    #[test]
    fn seasons_from_dates() {
        assert_eq!(assign_season(&ts(2015, 3, 1)), Season::Spring);
        assert_eq!(assign_season(&ts(2015, 5, 31)), Season::Spring);
        assert_eq!(assign_season(&ts(2015, 6, 1)), Season::Summer);
        assert_eq!(assign_season(&ts(2015, 11, 30)), Season::Fall);
        assert_eq!(assign_season(&ts(2015, 12, 15)), Season::Winter);
        assert_eq!(assign_season(&ts(2016, 2, 29)), Season::Winter);
        assert_eq!(season_key(&ts(2015, 12, 15)).to_string(), "winter-2015");
        assert_eq!(season_key(&ts(2016, 2, 29)).to_string(), "winter-2015");
        assert_eq!(season_key(&ts(2016, 3, 1)).to_string(), "spring-2016");
    }

    #[test]
    fn month_slices() {
        let mut a = post("1", -117.0, 33.0, "x");
        a.timestamp = ts(2015, 6, 2);
        let mut b = post("2", -117.0, 33.0, "x");
        b.timestamp = ts(2015, 7, 1);
        let slices = slice_by_month(&[a.clone(), b.clone()]);
        assert_eq!(slices.len(), 2);
        assert_eq!(slices[&(2015, 6)], vec![a.clone()]);
        assert!(slice_by_month(&[]).is_empty());
        let same = slice_by_month(&[a.clone(), a.clone(), a]);
        assert_eq!(same.len(), 1);
        assert_eq!(same[&(2015, 6)].len(), 3);
    }

    fn arb_post() -> impl Strategy<Value = GeoPost> {
        (
            0u8..6,
            -119.0f64..-115.0,
            31.0f64..35.0,
            0i64..(4 * 365 * 86_400),
            prop::sample::select(vec!["go sdsu", "Sea World fun", "lunch", "aztecs game"]),
            prop::sample::select(vec!["web", "bot", "Twitter for iPhone"]),
        )
            .prop_map(|(id, lon, lat, secs, text, source)| {
                let t = Utc.with_ymd_and_hms(2014, 1, 1, 0, 0, 0).unwrap()
                    + chrono::Duration::seconds(secs);
                GeoPost::new(id.to_string(), t, lon, lat, text, source, Platform::Twitter).unwrap()
            })
    }

    proptest! {
        #[test]
        fn filter_is_idempotent(posts in prop::collection::vec(arb_post(), 0..40)) {
            let bbox = GeoBBox::new(-118.0, 32.0, -116.0, 34.0).unwrap();
            let blocked: HashSet<String> = ["bot".to_string()].into_iter().collect();
            let (once, r1) = filter_noise(&posts, &bbox, &blocked).unwrap();
            let (twice, r2) = filter_noise(&once, &bbox, &blocked).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(r2.noise_count, 0);
            prop_assert_eq!(r1.final_count, r1.original_count - r1.noise_count);
            prop_assert_eq!(r1.reasons.total(), r1.noise_count);
            prop_assert_eq!(r1.final_count as usize, once.len());
        }

        #[test]
        fn query_subset_and_alias_monotone(posts in prop::collection::vec(arb_post(), 0..40)) {
            let q1 = PlaceQuery::new("SDSU", Vec::<String>::new()).unwrap();
            let q2 = PlaceQuery::new("SDSU", ["aztecs"]).unwrap();
            let r1 = query_keyword(&posts, &q1);
            let r2 = query_keyword(&posts, &q2);
            prop_assert!(r1.iter().all(|p| posts.contains(p)));
            prop_assert!(r1.iter().all(|p| r2.contains(p)));
            prop_assert!(r2.len() >= r1.len());
        }

        #[test]
        fn slices_partition(posts in prop::collection::vec(arb_post(), 0..40)) {
            let months = slice_by_month(&posts);
            let total: usize = months.values().map(Vec::len).sum();
            prop_assert_eq!(total, posts.len());
            for ((y, m), slice) in &months {
                prop_assert!(slice.iter().all(|p| p.timestamp.year() == *y && p.timestamp.month() == *m));
            }
            let seasons = slice_by_season(&posts);
            prop_assert_eq!(seasons.values().map(Vec::len).sum::<usize>(), posts.len());
        }

        #[test]
        fn exactly_one_season(secs in 0i64..(10 * 365 * 86_400)) {
            let t = Utc.with_ymd_and_hms(2010, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::seconds(secs);
            let s = assign_season(&t);
            let hits = Season::ALL.iter().filter(|c| **c == s).count();
            prop_assert_eq!(hits, 1);
        }
    }
}
