//! Nelder-Mead simplex minimization with box clamping.

use super::TunerError;

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Reflection coefficient.
    pub alpha: f64,
    /// Expansion coefficient.
    pub gamma: f64,
    /// Contraction coefficient.
    pub rho: f64,
    /// Shrink coefficient.
    pub sigma: f64,
    /// Stop once `f(worst) - f(best)` drops below this.
    pub tolerance: f64,
    /// Per-coordinate `(lo, hi)`; candidates are clamped before evaluation.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iterations: 500,
            alpha: 1.0,
            gamma: 2.0,
            rho: 0.5,
            sigma: 0.5,
            tolerance: 1e-12,
            bounds: None,
        }
    }
}

/// Simplex vertices with their objective values, sorted best to worst.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexState {
    pub points: Vec<(Vec<f64>, f64)>,
    pub iteration: usize,
}

impl SimplexState {
    fn sort(&mut self) {
        self.points.sort_by(|a, b| a.1.total_cmp(&b.1));
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.points[0].0, self.points[0].1)
    }

    pub fn spread(&self) -> f64 {
        self.points[self.points.len() - 1].1 - self.points[0].1
    }
}

/// Best vertex after each iteration (iteration 0 is the initial simplex).
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub iteration: usize,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trajectory: Vec<TrajectoryStep>,
}

fn clamp(x: &mut [f64], bounds: &Option<Vec<(f64, f64)>>) {
    if let Some(b) = bounds {
        for (xi, &(lo, hi)) in x.iter_mut().zip(b) {
            *xi = xi.clamp(lo, hi);
        }
    }
}

/// Rank of the edge vectors `p_i - p_0` by Gaussian elimination.
fn affine_rank(points: &[Vec<f64>]) -> usize {
    let mut rows: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = scale * 1e-12;
    let cols = points[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else {
            break;
        };
        if rows[pivot][c].abs() <= tol {
            continue;
        }
        rows.swap(rank, pivot);
        for r in rank + 1..rows.len() {
            let f = rows[r][c] / rows[rank][c];
            let (head, tail) = rows.split_at_mut(r);
            for (x, p) in tail[0][c..].iter_mut().zip(&head[rank][c..]) {
                *x -= f * p;
            }
        }
        rank += 1;
    }
    rank
}

/// Minimizes `objective` starting from `initial` (`n + 1` points in `n`
/// dimensions). Reflection, expansion, outside/inside contraction, and a
/// shrink toward the best vertex when contraction fails.
pub fn nelder_mead<F>(
    mut objective: F,
    initial: Vec<Vec<f64>>,
    options: &NelderMeadOptions,
) -> Result<NelderMeadResult, TunerError>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = initial.first().map_or(0, Vec::len);
    if n == 0 || initial.len() != n + 1 || initial.iter().any(|p| p.len() != n) {
        return Err(TunerError::DegenerateSimplex(format!(
            "need {} points of dimension {n}, got {}",
            n + 1,
            initial.len()
        )));
    }
    if let Some(b) = &options.bounds {
        if b.len() != n || b.iter().any(|&(lo, hi)| lo.partial_cmp(&hi).is_none_or(|o| o.is_gt())) {
            return Err(TunerError::InvalidConfig(
                "bounds do not match the simplex dimension".into(),
            ));
        }
    }
    let mut initial = initial;
    for p in &mut initial {
        clamp(p, &options.bounds);
    }
    if affine_rank(&initial) < n {
        return Err(TunerError::DegenerateSimplex(
            "initial points are affinely dependent".into(),
        ));
    }

    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        objective(x)
    };

    let mut state = SimplexState {
        points: initial
            .into_iter()
            .map(|p| {
                let v = eval(&p);
                (p, v)
            })
            .collect(),
        iteration: 0,
    };
    state.sort();
    let mut trajectory = vec![TrajectoryStep {
        iteration: 0,
        point: state.points[0].0.clone(),
        value: state.points[0].1,
    }];

    // Vertices can share a level set far from the optimum, so a small
    // spread is confirmed against the centroid before stopping.
    let settled = |state: &SimplexState, eval: &mut dyn FnMut(&[f64]) -> f64| -> bool {
        if state.spread() >= options.tolerance {
            return false;
        }
        let m = state.points.len() as f64;
        let mut c: Vec<f64> = (0..n)
            .map(|j| state.points.iter().map(|(p, _)| p[j]).sum::<f64>() / m)
            .collect();
        clamp(&mut c, &options.bounds);
        let f_c = eval(&c);
        let hi = f_c.max(state.points[n].1);
        let lo = f_c.min(state.points[0].1);
        hi - lo < options.tolerance
    };

    let mut converged = settled(&state, &mut eval);
    while !converged && state.iteration < options.max_iterations {
        let worst = state.points[n].clone();
        let centroid: Vec<f64> = (0..n)
            .map(|j| state.points[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let towards = |coef: f64, from: &[f64]| -> Vec<f64> {
            let mut x: Vec<f64> = centroid.iter().zip(from).map(|(c, f)| c + coef * (f - c)).collect();
            clamp(&mut x, &options.bounds);
            x
        };

        let reflected = towards(-options.alpha, &worst.0);
        let f_r = eval(&reflected);
        let (f_best, f_second_worst) = (state.points[0].1, state.points[n - 1].1);

        if f_r < f_best {
            let expanded = towards(-options.alpha * options.gamma, &worst.0);
            let f_e = eval(&expanded);
            state.points[n] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
        } else if f_r < f_second_worst {
            state.points[n] = (reflected, f_r);
        } else {
            let (contracted, f_c, accept) = if f_r < worst.1 {
                let c = towards(-options.alpha * options.rho, &worst.0);
                let f = eval(&c);
                (c, f, f <= f_r)
            } else {
                let c = towards(options.rho, &worst.0);
                let f = eval(&c);
                (c, f, f < worst.1)
            };
            if accept {
                state.points[n] = (contracted, f_c);
            } else {
                let best = state.points[0].0.clone();
                for (p, v) in state.points.iter_mut().skip(1) {
                    for (xi, bi) in p.iter_mut().zip(&best) {
                        *xi = bi + options.sigma * (*xi - bi);
                    }
                    clamp(p, &options.bounds);
                    *v = eval(p);
                }
            }
        }

        state.sort();
        state.iteration += 1;
        trajectory.push(TrajectoryStep {
            iteration: state.iteration,
            point: state.points[0].0.clone(),
            value: state.points[0].1,
        });
        converged = settled(&state, &mut eval);
    }

    let (point, value) = state.best();
    Ok(NelderMeadResult {
        point: point.to_vec(),
        value,
        iterations: state.iteration,
        evaluations,
        converged,
        trajectory,
    })
}
