//! Turning a cycle-source directive into an [`AnchorRequest`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hypergraph::{projection, Graph, Hypergraph, Vertex};

use super::hamiltonian::{
    bipartite_decomposition, complete_bipartite, double_k4_decomposition, double_k6_decomposition,
    search_decomposition, tillson_double_decomposition_cached, verify_cycle_packing,
    walecki_decomposition, CycleCache, CyclePacking, DEFAULT_SEARCH_CAP,
};
use super::AnchorRequest;

/// Where the Hamiltonian cycles for one anchor come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleSource {
    /// Picks a construction from the shape of the projection.
    Auto,
    Walecki,
    Figure,
    Bipartite,
    Search,
    /// A file of `q=<int> cycles=<lists>` lines over positions `1..=q`.
    File(PathBuf),
}

impl FromStr for CycleSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<CycleSource> {
        Ok(match s {
            "auto" => CycleSource::Auto,
            "walecki" => CycleSource::Walecki,
            "figure" => CycleSource::Figure,
            "bipartite" => CycleSource::Bipartite,
            "search" => CycleSource::Search,
            other => match other.strip_prefix("file:") {
                Some(p) if !p.is_empty() => CycleSource::File(PathBuf::from(p)),
                _ => {
                    return Err(Error::InvalidParameters(format!(
                        "unknown cycle source {other:?} (walecki | figure | bipartite | search | file:<path> | auto)"
                    )))
                }
            },
        })
    }
}

impl fmt::Display for CycleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleSource::Auto => f.write_str("auto"),
            CycleSource::Walecki => f.write_str("walecki"),
            CycleSource::Figure => f.write_str("figure"),
            CycleSource::Bipartite => f.write_str("bipartite"),
            CycleSource::Search => f.write_str("search"),
            CycleSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Settings shared by every anchor of one run.
#[derive(Debug, Default)]
pub struct ResolveOptions {
    /// Largest `q` the searches accept; `None` means the default.
    pub search_cap: Option<u32>,
    pub cache: Option<CycleCache>,
}

fn is_simple_complete(g: &Graph) -> bool {
    let q = g.vertex_count();
    g.multiplicities().len() == q * (q - 1) / 2 && g.edges().len() == q * (q - 1) / 2
}

/// The packing placed onto `target`, if it fits there.
fn fit(p: &CyclePacking, target: &Graph) -> Option<CyclePacking> {
    let placed = p.relabel_onto(target).ok()?;
    verify_cycle_packing(&placed).valid.then_some(placed)
}

/// The smallest `k` for which `cycles` is a valid packing of `k` copies of
/// `base`, if any.
fn smallest_copies(base: &Graph, cycles: Vec<Vec<Vertex>>) -> Option<CyclePacking> {
    let mut p = CyclePacking {
        base: base.clone(),
        copies: 1,
        cycles,
    };
    let mult = base.multiplicities();
    let need = p
        .usage()
        .iter()
        .map(|(e, &u)| mult.get(e).map(|&m| u.div_ceil(m)))
        .collect::<Option<Vec<usize>>>()?
        .into_iter()
        .max()
        .unwrap_or(1);
    p.copies = need.max(1) as u32;
    verify_cycle_packing(&p).valid.then_some(p)
}

fn complete_double(q: u32, opts: &mut ResolveOptions, target: &Graph) -> Result<CyclePacking> {
    let cap = opts.search_cap.unwrap_or(DEFAULT_SEARCH_CAP);
    let base = match q {
        4 => double_k4_decomposition(),
        6 => double_k6_decomposition(),
        _ => {
            let cache = opts.cache.get_or_insert_with(CycleCache::default);
            tillson_double_decomposition_cached(q, cap, cache)?
        }
    };
    base.relabel_onto(target)
}

/// Builds the cycle packing for `anchor` from `source`. Returns the request
/// with notes on any substitution made.
///
/// `copies`, when given, overrides the copy count; it must be at least the
/// count the construction needs.
pub fn anchor_request(
    h: &Hypergraph,
    anchor: Vertex,
    source: &CycleSource,
    copies: Option<u32>,
    opts: &mut ResolveOptions,
) -> Result<(AnchorRequest, Vec<String>)> {
    let p = projection(h, anchor)?;
    let q = p.vertex_count() as u32;
    // A Hamiltonian cycle must pass through every non-anchor vertex.
    if let Some(&v) = p.vertex_labels().iter().find(|&&v| p.degree(v) == 0) {
        return Err(Error::InvalidCyclePacking(format!(
            "anchor {anchor}: vertex {v} shares no edge with the anchor, so no cycle can span the projection"
        )));
    }
    let mut notes = Vec::new();
    let complete = is_simple_complete(&p);
    let unusable = |what: &str| {
        Error::InvalidCyclePacking(format!(
            "anchor {anchor}: {what} does not apply to this projection ({q} vertices, {} edges)",
            p.edges().len()
        ))
    };
    let cap = opts.search_cap.unwrap_or(DEFAULT_SEARCH_CAP);
    let search = |k: u32| -> Result<CyclePacking> {
        if q > cap {
            return Err(Error::CapExceeded {
                required: q as usize,
                cap: cap as usize,
                flag: "search cap",
            });
        }
        search_decomposition(&p, k)
    };

    let packing = match source {
        CycleSource::Walecki if complete && q % 2 == 1 => {
            walecki_decomposition(q)?.relabel_onto(&p)?
        }
        CycleSource::Walecki if complete && q >= 4 => {
            notes.push(format!(
                "anchor {anchor}: projection is K_{q} with q even, so Walecki does not apply; using a double cover by {} cycles",
                q - 1
            ));
            complete_double(q, opts, &p)?
        }
        CycleSource::Walecki => return Err(unusable("walecki")),
        CycleSource::Figure if complete && (q == 4 || q == 6) => complete_double(q, opts, &p)?,
        CycleSource::Figure => return Err(unusable("figure (K_4 or K_6 only)")),
        CycleSource::Bipartite => {
            if !q.is_multiple_of(4) || q == 0 {
                return Err(unusable("bipartite"));
            }
            let r = q / 4;
            let b = bipartite_decomposition(r)?;
            let same_shape = complete_bipartite(r).relabel_like(&p);
            match fit(&b, &p) {
                Some(placed) if same_shape => placed,
                _ => return Err(unusable("bipartite")),
            }
        }
        CycleSource::Search => {
            if complete && q.is_multiple_of(2) && q >= 8 && copies.unwrap_or(2) == 2 {
                complete_double(q, opts, &p)?
            } else {
                match copies {
                    Some(k) => search(k)?,
                    None => search(1).or_else(|_| search(2))?,
                }
            }
        }
        CycleSource::File(path) => {
            let file = CycleCache::load(path)?;
            let cycles = file.get(q).ok_or_else(|| {
                Error::InvalidCyclePacking(format!(
                    "anchor {anchor}: {} has no entry for q={q}",
                    path.display()
                ))
            })?;
            let positional = CyclePacking {
                base: Graph::complete((1..=q).collect()),
                copies: 1,
                cycles: cycles.to_vec(),
            };
            let placed = positional.relabel_onto(&p)?;
            smallest_copies(&p, placed.cycles).ok_or_else(|| {
                Error::InvalidCyclePacking(format!(
                    "anchor {anchor}: cycles from {} are not Hamiltonian cycles of the projection",
                    path.display()
                ))
            })?
        }
        CycleSource::Auto => {
            if let Some(order) = p.cycle_order() {
                CyclePacking {
                    base: p.clone(),
                    copies: 1,
                    cycles: vec![order],
                }
            } else if complete && q % 2 == 1 {
                walecki_decomposition(q)?.relabel_onto(&p)?
            } else if complete && q >= 4 {
                complete_double(q, opts, &p)?
            } else if q.is_multiple_of(4) && complete_bipartite(q / 4).relabel_like(&p) {
                bipartite_decomposition(q / 4)?.relabel_onto(&p)?
            } else {
                match copies {
                    Some(k) => search(k)?,
                    None => search(1).or_else(|_| search(2))?,
                }
            }
        }
    };
    let mut packing = packing;
    if let Some(k) = copies {
        if k < packing.copies {
            return Err(Error::InvalidParameters(format!(
                "anchor {anchor}: the {source} cycles need {} copies, but --copies gives {k}",
                packing.copies
            )));
        }
        if k > packing.copies {
            notes.push(format!(
                "anchor {anchor}: copy count raised from {} to {k} as requested",
                packing.copies
            ));
            packing.copies = k;
        }
    }
    Ok((AnchorRequest { anchor, packing }, notes))
}

trait RelabelLike {
    /// Same edge multiset after mapping positions to `target`'s sorted labels.
    fn relabel_like(&self, target: &Graph) -> bool;
}

impl RelabelLike for Graph {
    fn relabel_like(&self, target: &Graph) -> bool {
        let labels = target.vertex_labels();
        if labels.len() != self.vertex_count() {
            return false;
        }
        let own = self.vertex_labels();
        let map = |v: Vertex| labels[own.binary_search(&v).expect("own label")];
        let mut mine: Vec<(Vertex, Vertex)> = self
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (map(a), map(b));
                (x.min(y), x.max(y))
            })
            .collect();
        let mut theirs = target.edges().to_vec();
        mine.sort_unstable();
        theirs.sort_unstable();
        mine == theirs
    }
}
