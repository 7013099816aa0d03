use crate::data::Dataset;
use crate::error::{AnamError, Result};
use crate::model::{AnamModel, TermGrad, TermKind};

/// Uniformly spaced evaluation points for the smoothness penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothGrid {
    points: Vec<f64>,
    h: f64,
}

impl SmoothGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 3 {
            return Err(AnamError::InvalidArgument(
                "smoothness grid needs at least 3 points".into(),
            ));
        }
        let h = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
        let uniform = h > 0.0
            && points
                .windows(2)
                .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0));
        if !uniform {
            return Err(AnamError::InvalidArgument(
                "smoothness grid must be uniformly spaced and increasing".into(),
            ));
        }
        Ok(SmoothGrid { points, h })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        SmoothGrid::new(crate::model::linspace(lo, hi, n))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }
}

/// Sum of absolute second differences divided by `h^2`.
pub fn roughness(values: &[f64], h: f64) -> f64 {
    values
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
        .sum::<f64>()
        / (h * h)
}

/// Gradient of a scalar with respect to every model parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrad {
    pub bias: f64,
    pub weights: Vec<f64>,
    pub shapes: Vec<TermGrad>,
}

impl ModelGrad {
    pub fn zeros(model: &AnamModel) -> Self {
        ModelGrad {
            bias: 0.0,
            weights: vec![0.0; model.terms().len()],
            shapes: model.terms().iter().map(|t| t.zero_grad()).collect(),
        }
    }

    /// Flattened in the order of [`AnamModel::params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = vec![self.bias];
        for (w, blocks) in self.weights.iter().zip(&self.shapes) {
            out.push(*w);
            for b in blocks {
                out.extend_from_slice(b);
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &ModelGrad) {
        self.bias += other.bias;
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (ta, tb) in self.shapes.iter_mut().zip(&other.shapes) {
            for (ba, bb) in ta.iter_mut().zip(tb) {
                for (a, b) in ba.iter_mut().zip(bb) {
                    *a += b;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub total: f64,
    pub nll: f64,
    pub smooth: f64,
    pub mc: f64,
    pub grad: ModelGrad,
}

/// `omega * sum over smooth terms of roughness(weight * (raw - center))` on
/// each term's grid, with gradients. `grids[t]` is `None` for terms without
/// a smoothness requirement.
pub fn smoothness_penalty(
    model: &AnamModel,
    grids: &[Option<SmoothGrid>],
    omega: f64,
) -> Result<(f64, ModelGrad)> {
    let mut grad = ModelGrad::zeros(model);
    if omega == 0.0 {
        return Ok((0.0, grad));
    }
    let mut value = 0.0;
    for (t, (term, grid)) in model.terms().iter().zip(grids).enumerate() {
        let Some(grid) = grid else { continue };
        let (raw, cache) = term.forward(grid.points())?;
        let (a, c) = (term.weight(), term.center());
        let s: Vec<f64> = raw.iter().map(|r| a * (r - c)).collect();
        let inv_h2 = 1.0 / (grid.h * grid.h);
        value += roughness(&s, grid.h);
        let mut ds = vec![0.0; s.len()];
        for i in 1..s.len() - 1 {
            let d = s[i + 1] - 2.0 * s[i] + s[i - 1];
            // subgradient of |d| is taken as 0 at d = 0
            let g = if d > 0.0 {
                inv_h2
            } else if d < 0.0 {
                -inv_h2
            } else {
                0.0
            };
            ds[i + 1] += g;
            ds[i] -= 2.0 * g;
            ds[i - 1] += g;
        }
        grad.weights[t] = omega * ds.iter().zip(&raw).map(|(g, r)| g * (r - c)).sum::<f64>();
        let upstream: Vec<f64> = ds.iter().map(|g| omega * g * a).collect();
        term.backward(&cache, &upstream, &mut grad.shapes[t]);
    }
    Ok((omega * value, grad))
}

/// (main term, pair term) couples that share a feature.
pub(crate) fn mc_couples(model: &AnamModel) -> Vec<(usize, usize)> {
    let terms = model.terms();
    let mut couples = Vec::new();
    for (p, pair) in terms.iter().enumerate() {
        if !pair.spec().kind.is_pair() {
            continue;
        }
        for name in pair.spec().kind.features() {
            let main = terms.iter().position(
                |t| matches!(&t.spec().kind, TermKind::Main { feature } if feature == name),
            );
            if let Some(m) = main {
                couples.push((m, p));
            }
        }
    }
    couples
}

/// `omega * sum over couples of |mean(s_main * h_pair)|` on centred term
/// values, with gradients in those values. `contributions[t]` holds term `t`
/// on the batch rows. The returned gradient vector is empty for terms that
/// take part in no couple.
pub fn marginal_clarity_penalty(
    model: &AnamModel,
    contributions: &[Vec<f64>],
    omega: f64,
) -> (f64, Vec<Vec<f64>>) {
    let mut grads: Vec<Vec<f64>> = vec![Vec::new(); contributions.len()];
    if omega == 0.0 {
        return (0.0, grads);
    }
    let mut value = 0.0;
    for (m, p) in mc_couples(model) {
        let (s, h) = (&contributions[m], &contributions[p]);
        let n = s.len() as f64;
        let mean = s.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / n;
        value += mean.abs();
        let sign = if mean > 0.0 {
            1.0
        } else if mean < 0.0 {
            -1.0
        } else {
            0.0
        };
        let scale = omega * sign / n;
        for (t, other) in [(m, h), (p, s)] {
            if grads[t].is_empty() {
                grads[t] = vec![0.0; s.len()];
            }
            for (g, o) in grads[t].iter_mut().zip(other) {
                *g += scale * o;
            }
        }
    }
    (omega * value, grads)
}

/// Fixed contributions of frozen terms on every row of one dataset.
#[derive(Debug, Clone)]
pub(crate) struct Frozen {
    pub active: Vec<bool>,
    pub contributions: Vec<Option<Vec<f64>>>,
}

impl Frozen {
    pub fn new(model: &AnamModel, ds: &Dataset, active: &[bool]) -> Result<Self> {
        let contributions = (0..model.terms().len())
            .map(|t| {
                if active[t] {
                    Ok(None)
                } else {
                    model.term_contributions(t, ds).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Frozen {
            active: active.to_vec(),
            contributions,
        })
    }
}

/// The penalised training objective: mean negative log-likelihood over a
/// batch plus the smoothness and marginal-clarity penalties.
#[derive(Debug, Clone)]
pub struct Objective {
    pub omega_smooth: f64,
    pub omega_mc: f64,
    grids: Vec<Option<SmoothGrid>>,
}

impl Objective {
    /// Builds grids of `grid_points` points over the training range of each
    /// smooth-flagged main term.
    pub fn new(model: &AnamModel, omega_smooth: f64, omega_mc: f64, grid_points: usize) -> Result<Self> {
        let grids = model
            .terms()
            .iter()
            .map(|t| {
                if t.spec().smooth {
                    let (lo, hi) = model.feature_range(t.inputs()[0]);
                    SmoothGrid::uniform(lo, hi, grid_points).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Objective {
            omega_smooth,
            omega_mc,
            grids,
        })
    }

    pub fn grids(&self) -> &[Option<SmoothGrid>] {
        &self.grids
    }

    /// Objective and gradient on `rows` of `ds`.
    pub fn evaluate(&self, model: &AnamModel, ds: &Dataset, rows: &[usize]) -> Result<ObjectiveValue> {
        self.evaluate_with(model, ds, rows, None)
    }

    pub(crate) fn evaluate_with(
        &self,
        model: &AnamModel,
        ds: &Dataset,
        rows: &[usize],
        frozen: Option<&Frozen>,
    ) -> Result<ObjectiveValue> {
        if rows.is_empty() {
            return Err(AnamError::InvalidArgument("objective needs a non-empty batch".into()));
        }
        let n = rows.len() as f64;
        let terms = model.terms();
        let mut grad = ModelGrad::zeros(model);
        let mut caches = Vec::with_capacity(terms.len());
        let mut contributions = Vec::with_capacity(terms.len());
        for (t, term) in terms.iter().enumerate() {
            match frozen.and_then(|f| f.contributions[t].as_ref()) {
                Some(fixed) => {
                    contributions.push(rows.iter().map(|&r| fixed[r]).collect());
                    caches.push(None);
                }
                None => {
                    let (raw, cache) = term.forward(&term.gather(ds.values(), ds.p(), rows))?;
                    contributions.push(
                        raw.iter()
                            .map(|r| term.weight() * (r - term.center()))
                            .collect::<Vec<f64>>(),
                    );
                    caches.push(Some((raw, cache)));
                }
            }
        }

        let y = ds.response();
        let exposure = ds.exposure();
        let dist = model.distribution();
        let clip = model.clip();
        let mut nll = 0.0;
        let mut deta = Vec::with_capacity(rows.len());
        for (i, &r) in rows.iter().enumerate() {
            let mut eta = model.bias();
            for c in &contributions {
                eta += c[i];
            }
            if let Some(e) = exposure {
                eta += e[r].ln();
            }
            let (loss, d) = dist.nll_eta(y[r], eta, clip);
            if !loss.is_finite() {
                return Err(AnamError::NonFiniteObjective { row: r + 1 });
            }
            nll += loss;
            deta.push(d / n);
        }
        nll /= n;
        grad.bias = deta.iter().sum();

        let (mc, dmc) = marginal_clarity_penalty(model, &contributions, self.omega_mc);
        for (t, term) in terms.iter().enumerate() {
            let Some((raw, cache)) = &caches[t] else { continue };
            let upstream: Vec<f64> = if dmc[t].is_empty() {
                deta.clone()
            } else {
                deta.iter().zip(&dmc[t]).map(|(a, b)| a + b).collect()
            };
            grad.weights[t] = upstream
                .iter()
                .zip(raw)
                .map(|(u, r)| u * (r - term.center()))
                .sum();
            let shape_up: Vec<f64> = upstream.iter().map(|u| u * term.weight()).collect();
            term.backward(cache, &shape_up, &mut grad.shapes[t]);
        }

        let (smooth, sgrad) = smoothness_penalty(model, &self.grids, self.omega_smooth)?;
        if self.omega_smooth != 0.0 {
            grad.add_assign(&sgrad);
        }
        if let Some(f) = frozen {
            for (t, &a) in f.active.iter().enumerate() {
                if !a {
                    grad.weights[t] = 0.0;
                    grad.shapes[t].iter_mut().for_each(|b| b.fill(0.0));
                }
            }
        }
        Ok(ObjectiveValue {
            total: nll + smooth + mc,
            nll,
            smooth,
            mc,
            grad,
        })
    }

    /// Mean negative log-likelihood over all rows of `ds`, no penalties.
    pub fn mean_nll(&self, model: &AnamModel, ds: &Dataset) -> Result<f64> {
        self.mean_nll_with(model, ds, None)
    }

    pub(crate) fn mean_nll_with(&self, model: &AnamModel, ds: &Dataset, frozen: Option<&Frozen>) -> Result<f64> {
        let mut eta = vec![model.bias(); ds.n()];
        for t in 0..model.terms().len() {
            let owned;
            let c = match frozen.and_then(|f| f.contributions[t].as_ref()) {
                Some(fixed) => fixed,
                None => {
                    owned = model.term_contributions(t, ds)?;
                    &owned
                }
            };
            for (e, v) in eta.iter_mut().zip(c) {
                *e += v;
            }
        }
        let dist = model.distribution();
        let clip = model.clip();
        let y = ds.response();
        let mut total = 0.0;
        for (r, e) in eta.iter().enumerate() {
            let offset = ds.exposure().map_or(0.0, |x| x[r].ln());
            let (loss, _) = dist.nll_eta(y[r], e + offset, clip);
            if !loss.is_finite() {
                return Err(AnamError::NonFiniteObjective { row: r + 1 });
            }
            total += loss;
        }
        Ok(total / ds.n() as f64)
    }
}
