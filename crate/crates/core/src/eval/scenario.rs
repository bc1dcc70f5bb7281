use std::fmt;
use std::str::FromStr;

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::model::Dataset;
use crate::sampler::{standard_normal_vec, RngStream};
use crate::spatial::{build_grid_neighbors, CarSpectrum, GridDomain, NeighborOrder};

/// Linear predictor families of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearComponent {
    Intercept,
    Simple1,
    Simple2,
    Multiple,
    Confounded,
}

impl LinearComponent {
    pub const ALL: [LinearComponent; 5] = [
        LinearComponent::Intercept,
        LinearComponent::Simple1,
        LinearComponent::Simple2,
        LinearComponent::Multiple,
        LinearComponent::Confounded,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            LinearComponent::Intercept => "intercept",
            LinearComponent::Simple1 => "simple1",
            LinearComponent::Simple2 => "simple2",
            LinearComponent::Multiple => "multiple",
            LinearComponent::Confounded => "confounded",
        }
    }

    /// True coefficients, intercept first.
    pub fn coefficients(self) -> Vec<f64> {
        let s2 = std::f64::consts::SQRT_2;
        match self {
            LinearComponent::Intercept => vec![0.1],
            LinearComponent::Simple1 | LinearComponent::Confounded => vec![0.1, -s2],
            LinearComponent::Simple2 => vec![0.1, -8f64.sqrt()],
            LinearComponent::Multiple => vec![0.1, -s2, 2.0, 2.0],
        }
    }

    pub fn n_covariates(self) -> usize {
        self.coefficients().len() - 1
    }
}

impl fmt::Display for LinearComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for LinearComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Self::ALL
            .into_iter()
            .find(|c| c.tag() == t)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{s}`")))
    }
}

/// One simulation setting on a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub component: LinearComponent,
    pub kappa: f64,
    pub rho: f64,
    pub gamma2: f64,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl Scenario {
    /// 20 x 20 grid, `rho = 0.99`, `gamma2 = 1`.
    pub fn new(component: LinearComponent, kappa: f64, seed: u64) -> Self {
        Self {
            component,
            kappa,
            rho: 0.99,
            gamma2: 1.0,
            rows: 20,
            cols: 20,
            seed,
        }
    }

    pub fn with_grid(mut self, rows: usize, cols: usize) -> Self {
        self.rows = rows;
        self.cols = cols;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::InvalidInput(format!("kappa must lie in [0, 1], got {}", self.kappa)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidInput(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.gamma2 > 0.0 && self.gamma2.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma2 must be positive, got {}", self.gamma2)));
        }
        if self.rows * self.cols < 2 {
            return Err(Error::InvalidInput("grid needs at least two cells".into()));
        }
        Ok(())
    }

    pub fn stream(&self) -> RngStream {
        RngStream::new(self.seed, 0)
    }
}

/// Simulated dataset together with the latent field that generated it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub data: Dataset,
    pub latent: Vec<f64>,
    pub scenario: Scenario,
}

/// Covariates first, then the latent `x'beta + N(0, Sigma*)`; `y = 1` iff the latent is nonnegative.
pub fn simulate_dataset<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Simulation> {
    scenario.validate()?;
    let domain = GridDomain::new(scenario.rows, scenario.cols)?;
    let n = domain.len();
    let need_car = scenario.kappa > 0.0 || scenario.component == LinearComponent::Confounded;
    let car_factor = if need_car {
        let nb = build_grid_neighbors(&domain, NeighborOrder::Second);
        let k = CarSpectrum::new(&nb)?.dependence(scenario.rho)?;
        let f = SpdFactor::new(k.as_ref(), "CAR dependence").map_err(|_| {
            Error::InvalidInput(format!(
                "CAR dependence at rho {} is not positive definite on a {} x {} grid; use a smaller rho",
                scenario.rho, scenario.rows, scenario.cols
            ))
        })?;
        Some(f)
    } else {
        None
    };
    let comp = scenario.component;
    let ncov = comp.n_covariates();
    let mut cov = Mat::<f64>::zeros(n, ncov);
    match comp {
        LinearComponent::Intercept => {}
        LinearComponent::Simple1 | LinearComponent::Simple2 | LinearComponent::Multiple => {
            for i in 0..n {
                cov[(i, 0)] = rng.random::<f64>() - 0.5;
            }
            if comp == LinearComponent::Multiple {
                for i in 0..n {
                    cov[(i, 1)] = 0.5 * rng.random::<f64>();
                }
                for i in 0..n {
                    cov[(i, 2)] = -0.5 * rng.random::<f64>();
                }
            }
        }
        LinearComponent::Confounded => {
            let f = car_factor.as_ref().expect("built for confounded scenarios");
            let x1 = f.mul_lower(&standard_normal_vec(n, rng));
            for (i, v) in x1.into_iter().enumerate() {
                cov[(i, 0)] = v;
            }
        }
    }
    let beta = comp.coefficients();
    let gamma = scenario.gamma2.sqrt();
    let kappa = scenario.kappa;
    let spatial = match &car_factor {
        Some(f) if kappa > 0.0 => f.mul_lower(&standard_normal_vec(n, rng)),
        _ => vec![0.0; n],
    };
    let noise = if kappa < 1.0 { standard_normal_vec(n, rng) } else { vec![0.0; n] };
    let latent: Vec<f64> = (0..n)
        .map(|i| {
            let mean = beta[0] + (0..ncov).map(|j| beta[j + 1] * cov[(i, j)]).sum::<f64>();
            mean + gamma * (kappa.sqrt() * spatial[i] + (1.0 - kappa).sqrt() * noise[i])
        })
        .collect();
    let y = latent.iter().map(|&z| Some(u8::from(z >= 0.0))).collect();
    let names: Vec<String> = (1..=ncov).map(|j| format!("x{j}")).collect();
    let data = Dataset::with_intercept(y, &cov, &names, domain.coords().to_vec(), vec![false; n])?;
    Ok(Simulation {
        data,
        latent,
        scenario: *scenario,
    })
}

/// Fraction of first-order neighbour pairs sharing a class.
pub fn join_concordance(data: &Dataset) -> f64 {
    let nb = data.neighbors(NeighborOrder::First);
    let mut same = 0usize;
    let mut total = 0usize;
    for i in 0..data.n() {
        for &j in nb.neighbors(i) {
            if j > i {
                if let (Some(a), Some(b)) = (data.y[i], data.y[j]) {
                    total += 1;
                    same += usize::from(a == b);
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        same as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::norm_cdf;

    #[test]
    fn coefficients_match_table() {
        assert_eq!(LinearComponent::Intercept.coefficients(), vec![0.1]);
        assert!((LinearComponent::Simple2.coefficients()[1] + 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(LinearComponent::Multiple.coefficients()[2..], [2.0, 2.0]);
        assert_eq!("Simple-1".parse::<LinearComponent>().unwrap(), LinearComponent::Simple1);
    }

    #[test]
    fn independent_intercept_marginal() {
        let sc = Scenario::new(LinearComponent::Intercept, 0.0, 3).with_grid(100, 100);
        let sim = simulate_dataset(&sc, &mut sc.stream().rng()).unwrap();
        let mean = sim.data.y.iter().map(|v| f64::from(v.unwrap())).sum::<f64>() / 10_000.0;
        assert!((mean - norm_cdf(0.1)).abs() < 0.02);
    }

    #[test]
    fn deterministic_and_covariate_ranges() {
        let sc = Scenario::new(LinearComponent::Multiple, 0.5, 11);
        let a = simulate_dataset(&sc, &mut sc.stream().rng()).unwrap();
        let b = simulate_dataset(&sc, &mut sc.stream().rng()).unwrap();
        assert_eq!(a.latent, b.latent);
        assert_eq!(a.data.y, b.data.y);
        let x = a.data.covariates();
        for i in 0..400 {
            assert!((-0.5..0.5).contains(&x[(i, 0)]));
            assert!((0.0..0.5).contains(&x[(i, 1)]));
            assert!((-0.5..=0.0).contains(&x[(i, 2)]));
        }
    }

    #[test]
    fn simple1_covariate_lowers_latent() {
        let sc = Scenario::new(LinearComponent::Simple1, 0.25, 5);
        let sim = simulate_dataset(&sc, &mut sc.stream().rng()).unwrap();
        let x: Vec<f64> = (0..400).map(|i| sim.data.x[(i, 1)]).collect();
        let mx = x.iter().sum::<f64>() / 400.0;
        let mz = sim.latent.iter().sum::<f64>() / 400.0;
        let c: f64 = x.iter().zip(&sim.latent).map(|(a, b)| (a - mx) * (b - mz)).sum();
        assert!(c < 0.0);
    }

    #[test]
    fn spatial_fields_are_more_concordant() {
        let mut wins = 0;
        for rep in 0..50 {
            let dep = Scenario::new(LinearComponent::Intercept, 1.0, rep);
            let ind = Scenario::new(LinearComponent::Intercept, 0.0, rep);
            let a = simulate_dataset(&dep, &mut dep.stream().rng()).unwrap();
            let b = simulate_dataset(&ind, &mut ind.stream().rng()).unwrap();
            wins += usize::from(join_concordance(&a.data) > join_concordance(&b.data));
        }
        assert!(wins >= 48, "{wins}");
    }

    #[test]
    fn bad_kappa() {
        let sc = Scenario::new(LinearComponent::Simple1, 1.5, 0);
        assert!(simulate_dataset(&sc, &mut sc.stream().rng()).is_err());
    }
}
