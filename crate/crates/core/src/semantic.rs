//! Tokenization, document-frequency term counts, and PMI term tables.
//!
//! All counts are document counts: a term present several times in one post counts once.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{GeoPost, PlaceQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Hashtag,
    Mention,
    CharBigram,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
}

impl Token {
    fn new(surface: String, kind: TokenKind) -> Self {
        Self { surface, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TokenizeMode {
    #[default]
    Latin,
    CjkBigram,
}

impl TokenizeMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "latin" => Ok(Self::Latin),
            "cjk" | "cjk-bigram" | "cjkbigram" => Ok(Self::CjkBigram),
            other => Err(Error::Config(format!("unknown tokenize mode `{other}`"))),
        }
    }
}

/// Han, kana and hangul code points.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2EBEF
        | 0x3040..=0x309F
        | 0x30A0..=0x30FF
        | 0x31F0..=0x31FF
        | 0x1100..=0x11FF
        | 0x3130..=0x318F
        | 0xAC00..=0xD7AF)
}

fn is_url(chunk: &str) -> bool {
    let lower = chunk.to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn push_cjk_run(run: &[char], whole: bool, out: &mut Vec<Token>) {
    if whole || run.len() == 1 {
        out.push(Token::new(run.iter().collect(), TokenKind::Word));
    } else {
        for w in run.windows(2) {
            out.push(Token::new(w.iter().collect(), TokenKind::CharBigram));
        }
    }
}

/// Splits post text into case-folded tokens. URLs are dropped; `#` and `@` directly
/// before a word bind to it. In CJK mode, runs of CJK characters become overlapping
/// bigrams, or whole words when the text is already space-segmented.
pub fn tokenize(text: &str, mode: TokenizeMode) -> Vec<Token> {
    let cjk = mode == TokenizeMode::CjkBigram;
    let chunks: Vec<&str> = text.split_whitespace().filter(|c| !is_url(c)).collect();
    let presegmented = cjk && chunks.iter().filter(|c| c.chars().any(is_cjk)).count() >= 2;
    let is_word = |c: char| (c.is_alphanumeric() || c == '_') && !(cjk && is_cjk(c));

    let mut out = Vec::new();
    for chunk in chunks {
        let chars: Vec<char> = chunk.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if cjk && is_cjk(c) {
                let start = i;
                while i < chars.len() && is_cjk(chars[i]) {
                    i += 1;
                }
                push_cjk_run(&chars[start..i], presegmented, &mut out);
            } else if is_word(c)
                || ((c == '#' || c == '@') && chars.get(i + 1).is_some_and(|n| is_word(*n)))
            {
                let kind = match c {
                    '#' => TokenKind::Hashtag,
                    '@' => TokenKind::Mention,
                    _ => TokenKind::Word,
                };
                let start = i;
                i += 1;
                while i < chars.len() && is_word(chars[i]) {
                    i += 1;
                }
                let surface: String = chars[start..i].iter().collect();
                out.push(Token::new(surface.to_lowercase(), kind));
            } else {
                i += 1;
            }
        }
    }
    out
}

/// Reads a stopword list: one term per line, `#` starts a comment line.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Document frequency of every non-stopword term, top `k` by frequency then term.
pub fn top_terms<S: AsRef<str>>(
    docs: &[Vec<S>],
    stopwords: &HashSet<String>,
    k: usize,
) -> Result<Vec<(String, u64)>> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        let unique: BTreeSet<&str> = doc.iter().map(|t| t.as_ref()).collect();
        for t in unique {
            if !stopwords.contains(t) {
                *df.entry(t).or_default() += 1;
            }
        }
    }
    let mut v: Vec<(String, u64)> = df.into_iter().map(|(t, n)| (t.to_string(), n)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    Ok(v)
}

/// Pointwise mutual information in bits from document counts.
pub fn pmi(n_docs: u64, n_x: u64, n_y: u64, n_xy: u64) -> Result<f64> {
    if n_docs == 0 || n_x == 0 || n_y == 0 {
        return Err(Error::param(
            "counts",
            "n_docs, n_x and n_y must be at least 1",
        ));
    }
    if n_x > n_docs || n_y > n_docs || n_xy > n_x.min(n_y) {
        return Err(Error::param(
            "counts",
            format!("inconsistent counts N={n_docs} x={n_x} y={n_y} xy={n_xy}"),
        ));
    }
    if n_xy == 0 {
        return Err(Error::NoCooccurrence);
    }
    // (n_xy / N) / ((n_x / N)(n_y / N)) with the N factors cancelled.
    Ok((n_xy as f64 * n_docs as f64 / (n_x as f64 * n_y as f64)).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableScope {
    Full,
    InCircle,
    OutCircle,
}

impl TableScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            TableScope::Full => "full",
            TableScope::InCircle => "in",
            TableScope::OutCircle => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRow {
    pub term: String,
    pub pmi: f64,
    /// Posts containing both the place name and the term.
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermTable {
    pub scope: TableScope,
    pub rows: Vec<TermRow>,
    pub k: usize,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl TermTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,pmi,frequency\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                csv_field(&r.term),
                r.pmi,
                r.frequency
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.rows).expect("rows serialize")
    }
}

/// Per-term document counts of a corpus against a place query.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub n_docs: u64,
    /// Posts matching the place query.
    pub n_x: u64,
    /// term -> (posts containing it, matching posts containing it).
    pub terms: BTreeMap<String, (u64, u64)>,
    /// Token sets of the matching posts, for candidate selection.
    #[serde(skip)]
    matching_docs: Vec<Vec<String>>,
}

impl CorpusCounts {
    pub fn from_corpus(corpus: &[GeoPost], query: &PlaceQuery, mode: TokenizeMode) -> Self {
        let docs: Vec<(bool, BTreeSet<String>)> = corpus
            .par_iter()
            .map(|p| {
                let set = tokenize(&p.text, mode)
                    .into_iter()
                    .map(|t| t.surface)
                    .collect();
                (query.matches(&p.text), set)
            })
            .collect();
        let mut counts = CorpusCounts {
            n_docs: docs.len() as u64,
            ..Default::default()
        };
        for (is_x, set) in docs {
            if is_x {
                counts.n_x += 1;
            }
            for t in &set {
                let e = counts.terms.entry(t.clone()).or_default();
                e.0 += 1;
                if is_x {
                    e.1 += 1;
                }
            }
            if is_x {
                counts.matching_docs.push(set.into_iter().collect());
            }
        }
        counts
    }

    /// Counts of two disjoint corpora combined.
    pub fn merge(&self, other: &CorpusCounts) -> CorpusCounts {
        let mut out = self.clone();
        out.n_docs += other.n_docs;
        out.n_x += other.n_x;
        for (t, (y, xy)) in &other.terms {
            let e = out.terms.entry(t.clone()).or_default();
            e.0 += y;
            e.1 += xy;
        }
        out.matching_docs
            .extend(other.matching_docs.iter().cloned());
        out
    }
}

/// Surfaces that name the place itself: each name and alias, its tokens, and the
/// hashtag/mention forms of those tokens.
fn place_terms(query: &PlaceQuery, mode: TokenizeMode) -> HashSet<String> {
    let mut out = HashSet::new();
    for needle in query.needles() {
        for t in tokenize(&needle, mode) {
            let bare = t.surface.trim_start_matches(['#', '@']).to_string();
            out.insert(format!("#{bare}"));
            out.insert(format!("@{bare}"));
            out.insert(bare);
        }
        out.insert(needle);
    }
    out
}

/// Scores the `k` most frequent terms of the place-matching posts by PMI against the
/// place name over the whole `corpus`.
pub fn term_table(
    corpus: &[GeoPost],
    query: &PlaceQuery,
    stopwords: &HashSet<String>,
    k: usize,
    scope: TableScope,
    mode: TokenizeMode,
) -> Result<TermTable> {
    let counts = CorpusCounts::from_corpus(corpus, query, mode);
    term_table_from_counts(&counts, query, stopwords, k, scope, mode)
}

pub fn term_table_from_counts(
    counts: &CorpusCounts,
    query: &PlaceQuery,
    stopwords: &HashSet<String>,
    k: usize,
    scope: TableScope,
    mode: TokenizeMode,
) -> Result<TermTable> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let mut table = TermTable {
        scope,
        rows: Vec::new(),
        k,
    };
    if counts.n_x == 0 {
        return Ok(table);
    }
    let mut excluded = place_terms(query, mode);
    excluded.extend(stopwords.iter().cloned());
    for (term, _) in top_terms(&counts.matching_docs, &excluded, k)? {
        let (n_y, n_xy) = counts.terms[&term];
        match pmi(counts.n_docs, counts.n_x, n_y, n_xy) {
            Ok(score) => table.rows.push(TermRow {
                term,
                pmi: score,
                frequency: n_xy,
            }),
            Err(Error::NoCooccurrence) => {}
            Err(e) => return Err(e),
        }
    }
    table.rows.sort_by(|a, b| {
        b.pmi
            .total_cmp(&a.pmi)
            .then(b.frequency.cmp(&a.frequency))
            .then_with(|| a.term.cmp(&b.term))
    });
    Ok(table)
}
