//! Over-representation of selected genes in pathway gene sets, by the exact
//! one-sided hypergeometric test.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpret::SelectionResult;

/// A named gene set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneSet {
    pub name: String,
    pub description: String,
    /// Distinct members in file order.
    pub members: Vec<String>,
}

/// Gene sets in file order with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneSetCollection {
    sets: Vec<GeneSet>,
}

impl GeneSetCollection {
    pub fn new(sets: Vec<GeneSet>) -> Result<Self> {
        let mut names = HashSet::new();
        for s in &sets {
            if !names.insert(s.name.as_str()) {
                return Err(Error::Duplicate { what: "gene set", name: s.name.clone() });
            }
            if s.members.is_empty() || s.members.iter().any(String::is_empty) {
                return Err(Error::Value(format!("gene set {:?} has empty members", s.name)));
            }
        }
        Ok(Self { sets })
    }

    pub fn sets(&self) -> &[GeneSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Reads a GMT file: `name<TAB>description<TAB>gene1<TAB>gene2...`.
pub fn load_gmt(path: impl AsRef<Path>) -> Result<GeneSetCollection> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gmt(&text)
}

pub fn parse_gmt(text: &str) -> Result<GeneSetCollection> {
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(Error::Format(format!("GMT line {} has {} fields, need at least 3", i + 1, fields.len())));
        }
        let mut seen = HashSet::new();
        let members: Vec<String> = fields[2..]
            .iter()
            .map(|g| g.trim())
            .filter(|g| !g.is_empty() && seen.insert(*g))
            .map(str::to_owned)
            .collect();
        if members.is_empty() {
            return Err(Error::Format(format!("GMT line {} lists no genes", i + 1)));
        }
        sets.push(GeneSet {
            name: fields[0].to_owned(),
            description: fields[1].to_owned(),
            members,
        });
    }
    if sets.is_empty() {
        return Err(Error::Value("GMT input contains no gene sets".into()));
    }
    GeneSetCollection::new(sets)
}

/// Canonical form used for symbol matching: trimmed, upper-cased.
pub fn normalize_symbol(s: &str) -> String {
    s.trim().to_uppercase()
}

/// A positive float kept as `mantissa * 2^exponent` so long products
/// neither overflow nor underflow.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mantissa: f64,
    exponent: i64,
}

impl Scaled {
    const ONE: Scaled = Scaled { mantissa: 1.0, exponent: 0 };

    fn mul(mut self, factor: f64) -> Self {
        self.mantissa *= factor;
        self.renormalize()
    }

    fn renormalize(mut self) -> Self {
        let m = self.mantissa.abs();
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            let shift = m.log2().round() as i32;
            // multiplication by a power of two is exact
            self.mantissa *= 2f64.powi(-shift);
            self.exponent += i64::from(shift);
        }
        self
    }

    fn ln(self) -> f64 {
        self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_2
    }
}

/// `C(a, b)` as a scaled product of `min(b, a - b)` ratios.
fn choose(a: u64, b: u64) -> Scaled {
    let b = b.min(a - b);
    (1..=b).fold(Scaled::ONE, |acc, i| acc.mul((a - b + i) as f64 / i as f64))
}

/// `P(overlap)` for a hypergeometric draw.
fn pmf(k: u64, n: u64, big_k: u64, big_n: u64) -> Scaled {
    let num_a = choose(big_k, k);
    let num_b = choose(big_n - big_k, n - k);
    let den = choose(big_n, n);
    Scaled {
        mantissa: num_a.mantissa * num_b.mantissa / den.mantissa,
        exponent: num_a.exponent + num_b.exponent - den.exponent,
    }
    .renormalize()
}

/// `P(X >= overlap)` for `X ~ Hypergeometric(universe, pathway, selected)`.
///
/// The tail is summed from whichever side keeps the terms decreasing, each
/// term obtained from its neighbour by an exact ratio recurrence, so no
/// log-gamma cancellation is involved. Results below the smallest positive
/// normal float are clamped to it.
pub fn hypergeom_tail(overlap: u64, selected: u64, pathway: u64, universe: u64) -> Result<f64> {
    hypergeom_tail_ln(overlap, selected, pathway, universe).map(|ln| ln.exp().clamp(f64::MIN_POSITIVE, 1.0))
}

/// Natural log of [`hypergeom_tail`], without clamping.
pub fn hypergeom_tail_ln(overlap: u64, selected: u64, pathway: u64, universe: u64) -> Result<f64> {
    let (k, n, big_k, big_n) = (overlap, selected, pathway, universe);
    if k > n.min(big_k) || big_k > big_n || n > big_n {
        return Err(Error::Domain(format!(
            "inconsistent counts: overlap={k}, selected={n}, pathway={big_k}, universe={big_n}"
        )));
    }
    let lower_support = (n + big_k).saturating_sub(big_n);
    if k <= lower_support {
        return Ok(0.0);
    }
    let upper_support = n.min(big_k);
    let mode = ((n + 1) as f64 * (big_k + 1) as f64 / (big_n + 2) as f64).floor() as u64;

    if k > mode {
        // upper tail, terms decrease from k upwards
        let first = pmf(k, n, big_k, big_n);
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        for j in k..upper_support {
            term *= ((big_k - j) * (n - j)) as f64 / ((j + 1) * (big_n + j + 1 - big_k - n)) as f64;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        Ok((first.ln() + sum.ln()).min(0.0))
    } else {
        // 1 - P(X <= k - 1), terms decrease from k - 1 downwards
        let first = pmf(k - 1, n, big_k, big_n);
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        let mut j = k - 1;
        while j > lower_support {
            term *= (j * (big_n + j - big_k - n)) as f64 / ((big_k - j + 1) * (n - j + 1)) as f64;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            j -= 1;
        }
        let lower = (first.ln() + sum.ln()).exp();
        Ok((1.0 - lower).max(0.0).ln().min(0.0))
    }
}

/// One (variate, pathway) test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentRow {
    /// 1-based variate index.
    pub variate: usize,
    pub pathway: String,
    pub overlap: u64,
    pub selected: u64,
    /// Pathway members present in the universe.
    pub pathway_size: u64,
    pub universe: u64,
    pub p_value: f64,
    pub neg_log10_p: f64,
    pub overlap_percent: f64,
    /// Benjamini-Hochberg adjusted p-value within the variate.
    pub bh_p: f64,
    /// False when the pathway shares no gene with the universe.
    pub computed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnrichmentTable {
    pub rows: Vec<EnrichmentRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnrichOptions {
    /// Use the EASE score: the tail probability with the overlapping gene
    /// count (and therefore every margin) reduced by one.
    pub ease: bool,
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
pub fn benjamini_hochberg(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(b.cmp(&a)));
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank_from_top, &i) in order.iter().enumerate() {
        let rank = m - rank_from_top;
        running = running.min(p[i] * (m as f64 / rank as f64));
        out[i] = running.min(1.0);
    }
    out
}

/// Tests every variate's selected genes against every pathway.
///
/// Pathway memberships are intersected with the universe first. Variates
/// with an empty selection produce no rows. Rows are ordered by variate,
/// then by pathway file order.
pub fn enrich(
    selections: &SelectionResult,
    gs: &GeneSetCollection,
    universe: &[String],
    options: EnrichOptions,
) -> Result<EnrichmentTable> {
    let universe: HashSet<String> = universe.iter().map(|g| normalize_symbol(g)).collect();
    if universe.is_empty() {
        return Err(Error::Value("enrichment universe is empty".into()));
    }
    let big_n = universe.len() as u64;
    let pathways: Vec<HashSet<String>> = gs
        .sets()
        .iter()
        .map(|s| {
            s.members
                .iter()
                .map(|g| normalize_symbol(g))
                .filter(|g| universe.contains(g))
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    for (i, genes) in selections.selected.iter().enumerate() {
        let selected: HashSet<String> = genes.iter().map(|g| normalize_symbol(g)).collect();
        if selected.is_empty() {
            continue;
        }
        if let Some(missing) = selected.iter().find(|g| !universe.contains(*g)) {
            return Err(Error::Precondition(format!("selected gene {missing:?} is not in the universe")));
        }
        let n = selected.len() as u64;
        let start = rows.len();
        for (set, members) in gs.sets().iter().zip(&pathways) {
            let big_k = members.len() as u64;
            let k = selected.iter().filter(|g| members.contains(*g)).count() as u64;
            let computed = big_k > 0;
            let p_value = if !computed {
                1.0
            } else if options.ease {
                if k == 0 {
                    1.0
                } else {
                    hypergeom_tail(k - 1, n - 1, big_k - 1, big_n - 1)?
                }
            } else {
                hypergeom_tail(k, n, big_k, big_n)?
            };
            rows.push(EnrichmentRow {
                variate: i + 1,
                pathway: set.name.clone(),
                overlap: k,
                selected: n,
                pathway_size: big_k,
                universe: big_n,
                p_value,
                neg_log10_p: if p_value >= 1.0 { 0.0 } else { -p_value.log10() },
                overlap_percent: if computed { 100.0 * k as f64 / big_k as f64 } else { 0.0 },
                bh_p: 1.0,
                computed,
            });
        }
        let idx: Vec<usize> = (start..rows.len()).filter(|&r| rows[r].computed).collect();
        let adjusted = benjamini_hochberg(&idx.iter().map(|&r| rows[r].p_value).collect::<Vec<_>>());
        for (r, q) in idx.into_iter().zip(adjusted) {
            rows[r].bh_p = q;
        }
    }
    Ok(EnrichmentTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_gmt() {
        let gs = parse_gmt("P1\tfirst\tA\tB\nP2\tsecond\tC\n").unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs.sets()[0].members, ["A", "B"]);
        assert_eq!(gs.sets()[1].name, "P2");
    }

    #[test]
    fn gmt_deduplicates_members() {
        let gs = parse_gmt("S\tdesc\tA\tA\tB\n").unwrap();
        assert_eq!(gs.sets()[0].members, ["A", "B"]);
    }

    #[test]
    fn gmt_errors() {
        assert!(matches!(parse_gmt(""), Err(Error::Value(_))));
        assert!(matches!(parse_gmt("S\tdesc\n"), Err(Error::Format(_))));
        assert!(matches!(parse_gmt("S\ta\tX\nS\tb\tY\n"), Err(Error::Duplicate { .. })));
    }

    #[test]
    fn tail_edge_cases() {
        assert_eq!(hypergeom_tail(0, 4, 5, 10).unwrap(), 1.0);
        // every gene in the pathway: overlap is forced to equal the selection
        assert!((hypergeom_tail(4, 4, 10, 10).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(hypergeom_tail(5, 4, 5, 10), Err(Error::Domain(_))));
        assert!(matches!(hypergeom_tail(1, 4, 11, 10), Err(Error::Domain(_))));
        assert!(matches!(hypergeom_tail(1, 11, 5, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_small_example() {
        let p = hypergeom_tail(4, 4, 5, 10).unwrap();
        assert!((p - 5.0 / 210.0).abs() < 1e-15);
    }

    #[test]
    fn extreme_tail_stays_positive() {
        let p = hypergeom_tail(2000, 2000, 2000, 100_000).unwrap();
        assert!(p > 0.0 && p <= f64::MIN_POSITIVE);
        assert!(hypergeom_tail_ln(2000, 2000, 2000, 100_000).unwrap() < -700.0);
    }

    #[test]
    fn bh_adjustment() {
        let q = benjamini_hochberg(&[0.01, 0.04, 0.03, 0.5]);
        // sorted: 0.01(1) 0.03(2) 0.04(3) 0.5(4); q = min over the tail of p*m/rank
        let expected = [0.04, 0.04 * 4.0 / 3.0, 0.04 * 4.0 / 3.0, 0.5];
        for (a, b) in q.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{q:?}");
        }
        assert!(benjamini_hochberg(&[]).is_empty());
    }

    #[test]
    fn symbol_normalization_is_idempotent() {
        for s in [" tp53 ", "BRCA1", "\tmyc\n", "Ca2"] {
            let once = normalize_symbol(s);
            assert_eq!(normalize_symbol(&once), once);
        }
        assert_eq!(normalize_symbol(" tp53 "), "TP53");
    }
}
