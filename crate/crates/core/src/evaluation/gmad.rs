//! Maximum-differentiation pair selection: fix one model as the defender,
//! group its predictions into quality bands, and let the attacker pick the
//! pair with the largest score gap inside each band.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmadPair {
    /// Id with the lowest attacker score in the band.
    pub image_id_low: String,
    /// Id with the highest attacker score in the band.
    pub image_id_high: String,
    pub attacker_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmadBand {
    /// Defender quantile this band is anchored at.
    pub anchor_quantile: f64,
    /// Defender score range covered by the band members.
    pub defender_band: [f64; 2],
    pub member_count: usize,
    /// None when fewer than two ids fall inside the band.
    pub pair: Option<GmadPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmadSelection {
    pub bands: Vec<GmadBand>,
}

/// Selects the maximally differing attacker pair within each defender
/// band.
///
/// Bands live in defender *quantile* space: members are the ids whose
/// fractional defender rank `(i + 0.5) / n` falls within
/// `anchor +- band_width / 2`, with anchors at `(k + 0.5) / levels`
/// (0.25 and 0.75 for the default two levels). Inside a band the chosen
/// pair maximizes the attacker score difference, found by one min/max
/// scan; score ties break toward the lexicographically smaller id.
pub fn gmad_select(
    defender: &[(String, f64)],
    attacker: &[(String, f64)],
    levels: usize,
    band_width: f64,
) -> Result<GmadSelection> {
    if levels == 0 {
        return Err(Error::invalid("gmad needs at least one quality level"));
    }
    if !(band_width > 0.0 && band_width <= 1.0) {
        return Err(Error::invalid("band width must be a quantile fraction in (0, 1]"));
    }
    if defender.len() != attacker.len() {
        return Err(Error::invalid(format!(
            "defender has {} ids, attacker {}",
            defender.len(),
            attacker.len()
        )));
    }
    let attacker_by_id: BTreeMap<&str, f64> =
        attacker.iter().map(|(id, q)| (id.as_str(), *q)).collect();
    if attacker_by_id.len() != attacker.len() {
        return Err(Error::invalid("attacker ids are not unique"));
    }
    for (id, _) in defender {
        if !attacker_by_id.contains_key(id.as_str()) {
            return Err(Error::invalid(format!("id `{id}` missing from the attacker scores")));
        }
    }

    // Defender quantiles: sort by (score, id); ties get distinct ranks in
    // id order, which keeps everything deterministic.
    let mut order: Vec<usize> = (0..defender.len()).collect();
    order.sort_by(|&i, &j| {
        defender[i]
            .1
            .partial_cmp(&defender[j].1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| defender[i].0.cmp(&defender[j].0))
    });
    let n = defender.len() as f64;

    let mut bands = Vec::with_capacity(levels);
    for k in 0..levels {
        let anchor = (k as f64 + 0.5) / levels as f64;
        let (lo, hi) = (anchor - band_width / 2.0, anchor + band_width / 2.0);
        let members: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(rank, _)| {
                let quantile = (*rank as f64 + 0.5) / n;
                quantile >= lo && quantile <= hi
            })
            .map(|(_, &idx)| idx)
            .collect();

        let defender_band = if members.is_empty() {
            [f64::NAN, f64::NAN]
        } else {
            let scores: Vec<f64> = members.iter().map(|&i| defender[i].1).collect();
            [scores.iter().copied().fold(f64::MAX, f64::min), scores.iter().copied().fold(f64::MIN, f64::max)]
        };

        let pair = if members.len() < 2 {
            None
        } else {
            let mut min_idx = members[0];
            let mut max_idx = members[0];
            for &idx in &members[1..] {
                let a = attacker_by_id[defender[idx].0.as_str()];
                let cur_min = attacker_by_id[defender[min_idx].0.as_str()];
                let cur_max = attacker_by_id[defender[max_idx].0.as_str()];
                if a < cur_min || (a == cur_min && defender[idx].0 < defender[min_idx].0) {
                    min_idx = idx;
                }
                if a > cur_max || (a == cur_max && defender[idx].0 < defender[max_idx].0) {
                    max_idx = idx;
                }
            }
            let gap = attacker_by_id[defender[max_idx].0.as_str()]
                - attacker_by_id[defender[min_idx].0.as_str()];
            Some(GmadPair {
                image_id_low: defender[min_idx].0.clone(),
                image_id_high: defender[max_idx].0.clone(),
                attacker_gap: gap,
            })
        };
        bands.push(GmadBand {
            anchor_quantile: anchor,
            defender_band,
            member_count: members.len(),
            pair,
        });
    }
    Ok(GmadSelection { bands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn scored(n: usize, seed: u64) -> Vec<(String, f64)> {
        let mut rng = crate::rng::derive_stream(seed, &["gmad-test"]);
        (0..n).map(|i| (format!("img{i:04}"), rng.gen::<f64>())).collect()
    }

    /// Exhaustive O(n^2) maximization over each band, with the same
    /// tie-breaking rule.
    fn brute_force(
        defender: &[(String, f64)],
        attacker: &[(String, f64)],
        levels: usize,
        band_width: f64,
    ) -> Vec<Option<GmadPair>> {
        let attacker_by_id: BTreeMap<&str, f64> =
            attacker.iter().map(|(id, q)| (id.as_str(), *q)).collect();
        let mut order: Vec<usize> = (0..defender.len()).collect();
        order.sort_by(|&i, &j| {
            defender[i]
                .1
                .partial_cmp(&defender[j].1)
                .unwrap()
                .then_with(|| defender[i].0.cmp(&defender[j].0))
        });
        let n = defender.len() as f64;
        let mut out = Vec::new();
        for k in 0..levels {
            let anchor = (k as f64 + 0.5) / levels as f64;
            let members: Vec<&String> = order
                .iter()
                .enumerate()
                .filter(|(rank, _)| {
                    let q = (*rank as f64 + 0.5) / n;
                    q >= anchor - band_width / 2.0 && q <= anchor + band_width / 2.0
                })
                .map(|(_, &idx)| &defender[idx].0)
                .collect();
            if members.len() < 2 {
                out.push(None);
                continue;
            }
            let mut best: Option<GmadPair> = None;
            for a in &members {
                for b in &members {
                    let (low, high) = if attacker_by_id[a.as_str()] <= attacker_by_id[b.as_str()] {
                        (a, b)
                    } else {
                        (b, a)
                    };
                    let gap = attacker_by_id[high.as_str()] - attacker_by_id[low.as_str()];
                    let candidate = GmadPair {
                        image_id_low: (*low).clone(),
                        image_id_high: (*high).clone(),
                        attacker_gap: gap,
                    };
                    let better = match &best {
                        None => true,
                        Some(b0) => {
                            gap > b0.attacker_gap
                                || (gap == b0.attacker_gap
                                    && (candidate.image_id_low.clone(), candidate.image_id_high.clone())
                                        < (b0.image_id_low.clone(), b0.image_id_high.clone()))
                        }
                    };
                    if better {
                        best = Some(candidate);
                    }
                }
            }
            out.push(best);
        }
        out
    }

    #[test]
    fn matches_brute_force_on_many_seeds() {
        for seed in 0..20 {
            let defender = scored(1000, seed);
            let attacker = scored(1000, seed + 1000);
            let fast = gmad_select(&defender, &attacker, 2, 0.05).unwrap();
            let slow = brute_force(&defender, &attacker, 2, 0.05);
            for (band, expected) in fast.bands.iter().zip(slow) {
                assert_eq!(band.pair, expected, "seed {seed}");
            }
        }
    }

    #[test]
    fn constant_attacker_has_zero_gap() {
        let defender = scored(100, 5);
        let attacker: Vec<(String, f64)> =
            defender.iter().map(|(id, _)| (id.clone(), 0.7)).collect();
        let selection = gmad_select(&defender, &attacker, 2, 0.2).unwrap();
        for band in &selection.bands {
            assert_eq!(band.pair.as_ref().unwrap().attacker_gap, 0.0);
        }
    }

    #[test]
    fn self_attack_gap_is_bounded_by_the_band() {
        // When the attacker agrees with the defender, the biggest gap it
        // can find is the defender range of the band itself.
        let defender = scored(500, 9);
        let selection = gmad_select(&defender, &defender, 2, 0.1).unwrap();
        for band in &selection.bands {
            let gap = band.pair.as_ref().unwrap().attacker_gap;
            assert!((gap - (band.defender_band[1] - band.defender_band[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn narrow_bands_report_empty() {
        let defender = scored(10, 2);
        let attacker = scored(10, 3);
        let selection = gmad_select(&defender, &attacker, 2, 0.01).unwrap();
        for band in &selection.bands {
            assert!(band.pair.is_none());
            assert!(band.member_count < 2);
        }
    }

    #[test]
    fn mismatched_ids_rejected() {
        let defender = scored(5, 1);
        let mut attacker = scored(5, 1);
        attacker[0].0 = "stranger".into();
        assert!(gmad_select(&defender, &attacker, 2, 0.5).is_err());
    }
}
