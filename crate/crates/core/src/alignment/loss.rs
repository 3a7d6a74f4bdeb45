//! The margin ranking losses over a similarity grid, with analytic
//! gradients with respect to every grid entry.

use super::{Embedding, LossConfig, LossVariant, PromptBank, SimilarityGrid};
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Cosine similarity of two unit vectors: their dot product, clamped into
/// `[-1, 1]` against rounding. Inputs must be finite and unit-norm.
pub fn cosine_similarity<S: Scalar>(a: &Embedding<S>, b: &Embedding<S>) -> Result<S> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("cosine similarity needs equal dimensions"));
    }
    let check = |e: &Embedding<S>| -> Result<()> {
        if !e.as_slice().iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("cosine similarity input is not finite"));
        }
        let norm = e.as_slice().iter().map(|&v| v * v).sum::<S>().sqrt();
        if (norm.to_f64().unwrap() - 1.0).abs() > 1e-4 {
            return Err(Error::invalid(format!("cosine similarity input has norm {norm}")));
        }
        Ok(())
    };
    check(a)?;
    check(b)?;
    Ok(a.dot(b.as_slice()).min(S::one()).max(-S::one()))
}

/// Mean similarity of `x` to the positive and negative prompts of a bank.
pub fn prompt_similarities<S: Scalar>(x: &Embedding<S>, bank: &PromptBank<S>) -> Result<(S, S)> {
    if bank.pairs.is_empty() {
        return Err(Error::invalid("prompt bank is empty"));
    }
    let n = cast::<S>(bank.pairs.len() as f64);
    let mut s_p = S::zero();
    let mut s_n = S::zero();
    for pair in &bank.pairs {
        s_p += cosine_similarity(x, &pair.positive)?;
        s_n += cosine_similarity(x, &pair.negative)?;
    }
    Ok((s_p / n, s_n / n))
}

/// Gradient of a loss with respect to every grid entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGrad<S> {
    pub s_p: Vec<[S; 2]>,
    pub s_n: Vec<[S; 2]>,
}

impl<S: Scalar> GridGrad<S> {
    fn zeros(levels: usize) -> Self {
        Self { s_p: vec![[S::zero(); 2]; levels], s_n: vec![[S::zero(); 2]; levels] }
    }

    fn scaled_add(&mut self, other: &GridGrad<S>, weight: S) {
        for (dst, src) in self.s_p.iter_mut().zip(&other.s_p) {
            dst[0] += weight * src[0];
            dst[1] += weight * src[1];
        }
        for (dst, src) in self.s_n.iter_mut().zip(&other.s_n) {
            dst[0] += weight * src[0];
            dst[1] += weight * src[1];
        }
    }
}

/// Loss value, its grid gradient, and the raw hinge arguments (each hinge
/// kinks where its argument crosses 0; the gradient checker uses these to
/// exclude parameters sitting on a kink).
#[derive(Debug, Clone)]
pub struct LossTerm<S> {
    pub value: S,
    pub grad: GridGrad<S>,
    pub hinge_args: Vec<S>,
}

/// Per-component values of the combined loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown<S> {
    pub cons: S,
    pub pos: S,
    pub neg: S,
    pub total: S,
}

/// Number of hinge terms in each ranking loss: 2 crops x 2 anchors over
/// all level pairs `i < j`.
pub fn ranking_term_count(levels: usize) -> usize {
    2 * 2 * levels * (levels - 1) / 2
}

/// Consistency loss: within each level, the two crops' similarities to an
/// anchor may differ by at most `m_cons`.
///
/// `sum_i [ max(0, |s_p[i][1] - s_p[i][2]| - m_cons)
///        + max(0, |s_n[i][1] - s_n[i][2]| - m_cons) ]`
pub fn loss_consistency<S: Scalar>(grid: &SimilarityGrid<S>, m_cons: f64) -> LossTerm<S> {
    let m = cast::<S>(m_cons);
    let mut value = S::zero();
    let mut grad = GridGrad::zeros(grid.levels());
    let mut hinge_args = Vec::with_capacity(2 * grid.levels());
    let mut one_side = |pair: &[S; 2], grad_pair: &mut [S; 2]| {
        let gap = pair[0] - pair[1];
        let arg = gap.abs() - m;
        hinge_args.push(arg);
        if arg > S::zero() {
            value += arg;
            let sign = if gap > S::zero() { S::one() } else { -S::one() };
            grad_pair[0] += sign;
            grad_pair[1] -= sign;
        }
    };
    for i in 0..grid.levels() {
        one_side(&grid.s_p[i], &mut grad.s_p[i]);
        one_side(&grid.s_n[i], &mut grad.s_n[i]);
    }
    LossTerm { value, grad, hinge_args }
}

/// Positive ranking loss: similarity to the positive anchors must drop by
/// `m_rank` from any level to every more-degraded level.
///
/// `sum_{i<j} sum_k [ max(0, s_p[j][k] - s_p[i][1] + m_rank)
///                  + max(0, s_p[j][k] - s_p[i][2] + m_rank) ]`
pub fn loss_positive<S: Scalar>(grid: &SimilarityGrid<S>, m_rank: f64) -> LossTerm<S> {
    hinge_rank(&grid.s_p, m_rank, RankDirection::HigherIsEarlier)
}

/// Negative ranking loss, the mirror of the positive one: similarity to
/// the negative anchors must *rise* by `m_rank` with the level.
///
/// `sum_{i<j} sum_k [ max(0, s_n[i][1] - s_n[j][k] + m_rank)
///                  + max(0, s_n[i][2] - s_n[j][k] + m_rank) ]`
pub fn loss_negative<S: Scalar>(grid: &SimilarityGrid<S>, m_rank: f64) -> LossTerm<S> {
    let mut term = hinge_rank(&grid.s_n, m_rank, RankDirection::LowerIsEarlier);
    // hinge_rank reports gradients in the s_p slot; move them to s_n.
    std::mem::swap(&mut term.grad.s_p, &mut term.grad.s_n);
    term
}

enum RankDirection {
    /// Values must decrease with the level (positive anchors).
    HigherIsEarlier,
    /// Values must increase with the level (negative anchors).
    LowerIsEarlier,
}

/// Shared hinge machinery for both ranking directions. Returns gradients
/// in `grad.s_p` regardless of which grid side the values came from.
fn hinge_rank<S: Scalar>(values: &[[S; 2]], m_rank: f64, direction: RankDirection) -> LossTerm<S> {
    let m = cast::<S>(m_rank);
    let levels = values.len();
    let mut value = S::zero();
    let mut grad = GridGrad::zeros(levels);
    let mut hinge_args = Vec::with_capacity(ranking_term_count(levels.max(1)));
    for i in 0..levels {
        for j in i + 1..levels {
            for k in 0..2 {
                for anchor in 0..2 {
                    // HigherIsEarlier: h = v[j][k] - v[i][anchor] + m
                    // LowerIsEarlier:  h = v[i][anchor] - v[j][k] + m
                    let (plus_idx, minus_idx) = match direction {
                        RankDirection::HigherIsEarlier => ((j, k), (i, anchor)),
                        RankDirection::LowerIsEarlier => ((i, anchor), (j, k)),
                    };
                    let h = values[plus_idx.0][plus_idx.1] - values[minus_idx.0][minus_idx.1] + m;
                    hinge_args.push(h);
                    if h > S::zero() {
                        value += h;
                        grad.s_p[plus_idx.0][plus_idx.1] += S::one();
                        grad.s_p[minus_idx.0][minus_idx.1] -= S::one();
                    }
                }
            }
        }
    }
    LossTerm { value, grad, hinge_args }
}

/// Weighted total loss. Dispatches on the configured variant.
pub fn total_loss<S: Scalar>(
    grid: &SimilarityGrid<S>,
    cfg: &LossConfig,
) -> Result<(LossTerm<S>, LossBreakdown<S>)> {
    cfg.validate()?;
    match cfg.variant {
        LossVariant::SimilarityRanking => {
            let cons = loss_consistency(grid, cfg.m_cons);
            let pos = loss_positive(grid, cfg.m_rank);
            let neg = loss_negative(grid, cfg.m_rank);
            let (wc, wp, wn) =
                (cast::<S>(cfg.lambda_cons), cast::<S>(cfg.lambda_pos), cast::<S>(cfg.lambda_neg));
            let value = wc * cons.value + wp * pos.value + wn * neg.value;
            let mut grad = GridGrad::zeros(grid.levels());
            grad.scaled_add(&cons.grad, wc);
            grad.scaled_add(&pos.grad, wp);
            grad.scaled_add(&neg.grad, wn);
            let mut hinge_args = Vec::new();
            for (term, w) in [(&cons, wc), (&pos, wp), (&neg, wn)] {
                if w > S::zero() {
                    hinge_args.extend_from_slice(&term.hinge_args);
                }
            }
            let breakdown =
                LossBreakdown { cons: cons.value, pos: pos.value, neg: neg.value, total: value };
            Ok((LossTerm { value, grad, hinge_args }, breakdown))
        }
        LossVariant::QualityRanking => loss_quality_ranking_variant(grid, cfg),
    }
}

#[inline]
fn sigmoid<S: Scalar>(z: S) -> S {
    if z >= S::zero() {
        S::one() / (S::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (S::one() + e)
    }
}

/// Ranking-on-quality ablation: each crop's softmax quality score
/// `q = sigmoid((s_p - s_n) / tau)` replaces the raw similarities in the
/// hinges. The positive-shaped sum ranks `q` and the negative-shaped sum
/// ranks the complement `1 - q`; the two coincide term by term, so the
/// ranking part is the same hinge sum taken once per weight.
pub fn loss_quality_ranking_variant<S: Scalar>(
    grid: &SimilarityGrid<S>,
    cfg: &LossConfig,
) -> Result<(LossTerm<S>, LossBreakdown<S>)> {
    cfg.validate()?;
    let levels = grid.levels();
    let tau = cast::<S>(cfg.tau);
    let mut q = vec![[S::zero(); 2]; levels];
    let mut dq_ds_p = vec![[S::zero(); 2]; levels]; // dq/ds_n is the negation
    for i in 0..levels {
        for k in 0..2 {
            let z = (grid.s_p[i][k] - grid.s_n[i][k]) / tau;
            let qv = sigmoid(z);
            q[i][k] = qv;
            dq_ds_p[i][k] = qv * (S::one() - qv) / tau;
        }
    }

    // Hinges on q: consistency within levels, decreasing rank across them.
    let q_grid = SimilarityGrid { s_p: q.clone(), s_n: q };
    let cons = loss_consistency(&q_grid, cfg.m_cons);
    let rank = hinge_rank(&q_grid.s_p, cfg.m_rank, RankDirection::HigherIsEarlier);

    let (wc, wp, wn) =
        (cast::<S>(cfg.lambda_cons), cast::<S>(cfg.lambda_pos), cast::<S>(cfg.lambda_neg));
    let value = wc * cons.value + (wp + wn) * rank.value;

    // Chain rule back to the raw similarities. Consistency gradients were
    // computed on the q copies placed in both grid slots; fold them.
    let mut grad_q = vec![[S::zero(); 2]; levels];
    for i in 0..levels {
        for k in 0..2 {
            grad_q[i][k] = wc * (cons.grad.s_p[i][k] + cons.grad.s_n[i][k])
                + (wp + wn) * rank.grad.s_p[i][k];
        }
    }
    let mut grad = GridGrad::zeros(levels);
    for i in 0..levels {
        for k in 0..2 {
            let chain = grad_q[i][k] * dq_ds_p[i][k];
            grad.s_p[i][k] = chain;
            grad.s_n[i][k] = -chain;
        }
    }
    let mut hinge_args = Vec::new();
    if wc > S::zero() {
        // The q grid duplicates q into both sides; keep one copy of each arg.
        hinge_args.extend(cons.hinge_args.chunks_exact(2).map(|pair| pair[0]));
    }
    if wp + wn > S::zero() {
        hinge_args.extend_from_slice(&rank.hinge_args);
    }
    let breakdown = LossBreakdown {
        cons: cons.value,
        pos: rank.value,
        neg: rank.value,
        total: value,
    };
    Ok((LossTerm { value, grad, hinge_args }, breakdown))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn grid(s_p: Vec<[f64; 2]>, s_n: Vec<[f64; 2]>) -> SimilarityGrid<f64> {
        SimilarityGrid::new(s_p, s_n).unwrap()
    }

    fn random_grid(levels: usize, seed: u64) -> SimilarityGrid<f64> {
        let mut rng = crate::rng::derive_stream(seed, &["loss-test-grid"]);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]
        };
        let s_p = (0..levels).map(|_| draw(&mut rng)).collect();
        let s_n = (0..levels).map(|_| draw(&mut rng)).collect();
        grid(s_p, s_n)
    }

    #[test]
    fn cosine_basics() {
        let a = Embedding::<f64>::from_unit(vec![1.0, 0.0]).unwrap();
        let b = Embedding::<f64>::from_unit(vec![0.0, 1.0]).unwrap();
        let neg = Embedding::<f64>::from_unit(vec![-1.0, 0.0]).unwrap();
        assert_eq!(cosine_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&a, &b).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&a, &neg).unwrap(), -1.0);
    }

    #[test]
    fn prompt_similarities_average_pairs() {
        use super::super::PromptPair;
        let x = Embedding::<f64>::from_unit(vec![1.0, 0.0]).unwrap();
        let mk = |x: f64, y: f64| Embedding::<f64>::normalized(vec![x, y]).unwrap();
        // Positive sims 0.2 and 0.4 by construction.
        let p1 = mk(0.2, (1.0f64 - 0.04).sqrt());
        let p2 = mk(0.4, (1.0f64 - 0.16).sqrt());
        let n = mk(0.0, 1.0);
        let bank = PromptBank::new(vec![
            PromptPair { positive: p1, negative: n.clone(), label: "a".into() },
            PromptPair { positive: p2, negative: n, label: "b".into() },
        ])
        .unwrap();
        let (s_p, s_n) = prompt_similarities(&x, &bank).unwrap();
        assert_abs_diff_eq!(s_p, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(s_n, 0.0, epsilon = 1e-12);

        let single = PromptBank::new(vec![bank.pairs[0].clone()]).unwrap();
        let (sp1, _) = prompt_similarities(&x, &single).unwrap();
        assert_abs_diff_eq!(sp1, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn consistency_hand_case() {
        // Single level, positive gap 0.01, zero negative gap.
        let g = grid(vec![[0.30, 0.29]], vec![[0.10, 0.10]]);
        let term = loss_consistency(&g, 2.5e-3);
        assert_abs_diff_eq!(term.value, 0.0075, epsilon = 1e-9);
        assert_eq!(term.grad.s_p[0], [1.0, -1.0]);
        assert_eq!(term.grad.s_n[0], [0.0, 0.0]);
    }

    #[test]
    fn consistency_zero_cases() {
        let equal = grid(vec![[0.2, 0.2], [0.1, 0.1]], vec![[0.0, 0.0], [0.3, 0.3]]);
        assert_eq!(loss_consistency(&equal, 2.5e-3).value, 0.0);
        // Gaps exactly at the margin sit on the hinge boundary.
        let m = 2.5e-3;
        let boundary = grid(vec![[0.2 + m, 0.2]], vec![[0.1, 0.1 - m]]);
        assert_abs_diff_eq!(loss_consistency(&boundary, m).value, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn positive_ranking_hand_cases() {
        // Correctly ordered by more than the margin: all hinges inactive.
        let ordered = grid(vec![[0.50, 0.50], [0.40, 0.40]], vec![[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(loss_positive(&ordered, 0.0675).value, 0.0);

        // Violated by 0.05: four active terms of 0.1175 each.
        let violated = grid(vec![[0.45, 0.45], [0.50, 0.50]], vec![[0.0, 0.0], [0.0, 0.0]]);
        let term = loss_positive(&violated, 0.0675);
        assert_abs_diff_eq!(term.value, 0.47, epsilon = 1e-9);
        assert_eq!(term.hinge_args.len(), ranking_term_count(2));
    }

    #[test]
    fn term_count_for_five_levels_is_forty() {
        assert_eq!(ranking_term_count(5), 40);
        let g = random_grid(5, 1);
        assert_eq!(loss_positive(&g, 0.0675).hinge_args.len(), 40);
        assert_eq!(loss_negative(&g, 0.0675).hinge_args.len(), 40);
    }

    #[test]
    fn negative_ranking_cases() {
        // Strictly increasing s_n by more than the margin: zero loss.
        let inc = |base: f64| [base, base];
        let g = grid(
            vec![[0.0, 0.0]; 5],
            vec![inc(0.0), inc(0.1), inc(0.2), inc(0.3), inc(0.4)],
        );
        assert_eq!(loss_negative(&g, 0.0675).value, 0.0);

        // Constant s_n: every one of the 40 hinges is active at exactly m.
        let flat = grid(vec![[0.0, 0.0]; 5], vec![[0.25, 0.25]; 5]);
        assert_abs_diff_eq!(loss_negative(&flat, 0.0675).value, 2.7, epsilon = 1e-9);
    }

    #[test]
    fn negative_equals_positive_on_negated_values() {
        for seed in 0..10 {
            let g = random_grid(5, seed);
            let negated = grid(
                g.s_n.iter().map(|row| [-row[0], -row[1]]).collect(),
                vec![[0.0, 0.0]; 5],
            );
            let direct = loss_negative(&g, 0.0675);
            let mirrored = loss_positive(&negated, 0.0675);
            assert_abs_diff_eq!(direct.value, mirrored.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn hinges_ignore_constant_shifts() {
        for seed in 0..5 {
            let g = random_grid(4, seed);
            let shift = 0.37;
            let shifted = grid(
                g.s_p.iter().map(|row| [row[0] + shift, row[1] + shift]).collect(),
                g.s_n.iter().map(|row| [row[0] - shift, row[1] - shift]).collect(),
            );
            assert_abs_diff_eq!(
                loss_consistency(&g, 2.5e-3).value,
                loss_consistency(&shifted, 2.5e-3).value,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                loss_positive(&g, 0.0675).value,
                loss_positive(&shifted, 0.0675).value,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                loss_negative(&g, 0.0675).value,
                loss_negative(&shifted, 0.0675).value,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn total_loss_weights_and_zero_cases() {
        let g = random_grid(5, 3);
        let zero = LossConfig {
            lambda_cons: 0.0,
            lambda_pos: 0.0,
            lambda_neg: 0.0,
            ..Default::default()
        };
        assert_eq!(total_loss(&g, &zero).unwrap().0.value, 0.0);

        let cons_only = LossConfig { lambda_pos: 0.0, lambda_neg: 0.0, ..Default::default() };
        assert_abs_diff_eq!(
            total_loss(&g, &cons_only).unwrap().0.value,
            loss_consistency(&g, 2.5e-3).value,
            epsilon = 1e-15
        );

        let (term, breakdown) = total_loss(&g, &LossConfig::default()).unwrap();
        let sum = loss_consistency(&g, 2.5e-3).value
            + loss_positive(&g, 0.0675).value
            + loss_negative(&g, 0.0675).value;
        assert_abs_diff_eq!(term.value, sum, epsilon = 1e-12);
        assert_abs_diff_eq!(breakdown.total, sum, epsilon = 1e-12);
    }

    #[test]
    fn crop_exchange_symmetry() {
        for seed in 0..10 {
            let g = random_grid(5, 100 + seed);
            let swapped = grid(
                g.s_p.iter().map(|row| [row[1], row[0]]).collect(),
                g.s_n.iter().map(|row| [row[1], row[0]]).collect(),
            );
            for cfg in [
                LossConfig::default(),
                LossConfig { variant: LossVariant::QualityRanking, ..Default::default() },
            ] {
                let a = total_loss(&g, &cfg).unwrap().0.value;
                let b = total_loss(&swapped, &cfg).unwrap().0.value;
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn perfect_ranking_gives_zero_total() {
        let m = 0.0675;
        let s_p: Vec<[f64; 2]> = (0..5).map(|i| [0.5 - i as f64 * (m + 0.01); 2]).collect();
        let s_n: Vec<[f64; 2]> = (0..5).map(|i| [-0.5 + i as f64 * (m + 0.01); 2]).collect();
        let g = grid(s_p, s_n);
        assert_eq!(total_loss(&g, &LossConfig::default()).unwrap().0.value, 0.0);
    }

    #[test]
    fn quality_variant_flat_grid_hits_closed_form() {
        // s_p == s_n everywhere: every q is exactly 0.5, the consistency
        // part vanishes, and all 2 x 40 ranking hinges sit at the margin.
        let g = grid(vec![[0.3, 0.3]; 5], vec![[0.3, 0.3]; 5]);
        let cfg = LossConfig { variant: LossVariant::QualityRanking, ..Default::default() };
        let (term, breakdown) = total_loss(&g, &cfg).unwrap();
        assert_abs_diff_eq!(term.value, 2.0 * 40.0 * 0.0675, epsilon = 1e-9);
        assert_eq!(breakdown.cons, 0.0);
    }

    #[test]
    fn quality_variant_zero_when_q_strictly_ordered() {
        // q decreasing by more than the margin, consistent within pairs.
        let s_p: Vec<[f64; 2]> = (0..5).map(|i| [0.8 - 0.35 * i as f64; 2]).collect();
        let s_n: Vec<[f64; 2]> = (0..5).map(|i| [-0.8 + 0.35 * i as f64; 2]).collect();
        let g = grid(s_p, s_n);
        let cfg = LossConfig { variant: LossVariant::QualityRanking, ..Default::default() };
        assert_eq!(total_loss(&g, &cfg).unwrap().0.value, 0.0);
    }

    #[test]
    fn quality_score_slope_at_equal_similarities() {
        // dq/ds_p at s_p == s_n with tau = 2 is sigmoid'(0)/tau = 0.125.
        // On a flat 2-level grid with only the ranking term active, each
        // higher-level entry sits in two active hinges with coefficient +1,
        // so its similarity gradient is 2 * 0.125.
        let g = grid(vec![[0.3, 0.3]; 2], vec![[0.3, 0.3]; 2]);
        let cfg = LossConfig {
            variant: LossVariant::QualityRanking,
            lambda_cons: 0.0,
            lambda_pos: 1.0,
            lambda_neg: 0.0,
            ..Default::default()
        };
        let (base, _) = total_loss(&g, &cfg).unwrap();
        assert_abs_diff_eq!(base.grad.s_p[1][0], 2.0 * 0.125, epsilon = 1e-9);
        let slope = base.grad.s_p[1][0] / 2.0;
        assert_abs_diff_eq!(slope, 0.125, epsilon = 1e-12);

        let eps = 1e-7;
        let mut bumped = g.clone();
        bumped.s_p[1][0] += eps;
        let (plus, _) = total_loss(&bumped, &cfg).unwrap();
        let numeric = (plus.value - base.value) / eps;
        assert_abs_diff_eq!(numeric, base.grad.s_p[1][0], epsilon = 1e-5);
    }

    #[test]
    fn grid_gradients_match_finite_differences() {
        let eps = 1e-7;
        for (seed, cfg) in [
            (7u64, LossConfig::default()),
            (8, LossConfig { variant: LossVariant::QualityRanking, ..Default::default() }),
            (9, LossConfig { lambda_pos: 0.3, lambda_neg: 2.0, lambda_cons: 0.5, ..Default::default() }),
        ] {
            let g = random_grid(4, seed);
            let (base, _) = total_loss(&g, &cfg).unwrap();
            for i in 0..g.levels() {
                for k in 0..2 {
                    for side in 0..2 {
                        let mut bumped = g.clone();
                        if side == 0 {
                            bumped.s_p[i][k] += eps;
                        } else {
                            bumped.s_n[i][k] += eps;
                        }
                        let (plus, _) = total_loss(&bumped, &cfg).unwrap();
                        let numeric = (plus.value - base.value) / eps;
                        let analytic =
                            if side == 0 { base.grad.s_p[i][k] } else { base.grad.s_n[i][k] };
                        assert_abs_diff_eq!(numeric, analytic, epsilon = 1e-5);
                    }
                }
            }
        }
    }
}
