//! Seeded generator for a small multi-lab, multi-patient cytometry analogue.
//!
//! Every patient is a Gaussian mixture on a shared set of populations; the
//! patients differ only in population proportions, arranged so that the
//! mixture means coincide. Each lab translates its clouds by a fixed offset
//! and every replicate jitters the proportions slightly.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDesign {
    pub patients: usize,
    pub replicates: usize,
    pub labs: usize,
    pub cells: usize,
    pub dim: usize,
    /// Distance of each mirrored population pair from the central one.
    pub separation: f64,
    pub population_sd: f64,
    /// Mass moved from the central population to a patient's own pair.
    pub patient_shift: f64,
    /// Per-coordinate standard deviation of the lab offsets.
    pub lab_sd: f64,
    /// Standard deviation of the replicate proportion jitter.
    pub replicate_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticDesign {
    fn default() -> Self {
        Self {
            patients: 3,
            replicates: 3,
            labs: 7,
            cells: 2000,
            dim: 7,
            separation: 2.5,
            population_sd: 0.5,
            patient_shift: 0.08,
            lab_sd: 0.25,
            replicate_sd: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSample {
    pub measure: DiscreteMeasure,
    pub patient: usize,
    pub replicate: usize,
    pub lab: usize,
}

impl SyntheticDesign {
    fn validate(&self) -> Result<()> {
        if self.patients == 0
            || self.replicates == 0
            || self.labs == 0
            || self.cells == 0
            || self.dim == 0
        {
            return Err(Error::InvalidParameter(
                "design sizes must be positive".into(),
            ));
        }
        let positive = [self.separation, self.population_sd];
        let nonnegative = [self.patient_shift, self.lab_sd, self.replicate_sd];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || nonnegative.iter().any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::InvalidParameter(
                "design scales must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Population means: a central one followed by one mirrored pair per
    /// patient along random unit directions.
    fn population_means(&self, rng: &mut ChaCha8Rng) -> Array2<f64> {
        let mut means = Array2::from_elem((1 + 2 * self.patients, self.dim), 2.5);
        for p in 0..self.patients {
            let mut dir: Array1<f64> = (0..self.dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            dir /= dir.dot(&dir).sqrt();
            dir *= self.separation;
            let mut plus = means.row_mut(1 + 2 * p);
            plus += &dir;
            let mut minus = means.row_mut(2 + 2 * p);
            minus -= &dir;
        }
        means
    }

    fn patient_proportions(&self, patient: usize) -> Vec<f64> {
        let n_pops = 1 + 2 * self.patients;
        let pair_mass = 0.5 / self.patients as f64;
        let mut props = vec![0.5 * pair_mass; n_pops];
        props[0] = 0.5;
        props[0] -= 2.0 * self.patient_shift;
        props[1 + 2 * patient] += self.patient_shift;
        props[2 + 2 * patient] += self.patient_shift;
        props
    }

    pub fn generate(&self) -> Result<Vec<SyntheticSample>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let means = self.population_means(&mut rng);
        if self.patient_proportions(0)[0] <= 0.0 {
            return Err(Error::InvalidParameter(
                "patient_shift exceeds the central population mass".into(),
            ));
        }
        let lab_noise = Normal::new(0.0, self.lab_sd.max(f64::MIN_POSITIVE)).expect("finite sd");
        let lab_offsets: Vec<Vec<f64>> = (0..self.labs)
            .map(|_| {
                (0..self.dim)
                    .map(|_| {
                        if self.lab_sd > 0.0 {
                            lab_noise.sample(&mut rng)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();

        let mut samples = Vec::with_capacity(self.patients * self.replicates * self.labs);
        for patient in 0..self.patients {
            for replicate in 0..self.replicates {
                // Replicates are distinct aliquots, shared across labs.
                let props = self.jittered(&self.patient_proportions(patient), &mut rng);
                for (lab, offset) in lab_offsets.iter().enumerate() {
                    let support = self.draw_cells(&means, &props, offset, &mut rng);
                    let id = format!("p{}_r{}_l{}", patient + 1, replicate + 1, lab + 1);
                    samples.push(SyntheticSample {
                        measure: DiscreteMeasure::uniform(id, support)?,
                        patient,
                        replicate,
                        lab,
                    });
                }
            }
        }
        Ok(samples)
    }

    fn jittered(&self, props: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut out: Vec<f64> = props
            .iter()
            .map(|&p| (p + self.replicate_sd * rng.sample::<f64, _>(StandardNormal)).max(1e-3))
            .collect();
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|p| *p /= total);
        out
    }

    fn draw_cells(
        &self,
        means: &Array2<f64>,
        props: &[f64],
        offset: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Array2<f64> {
        let mut cells = Array2::zeros((self.cells, self.dim));
        let mut cumulative = Vec::with_capacity(props.len());
        let mut acc = 0.0;
        for p in props {
            acc += p;
            cumulative.push(acc);
        }
        for mut row in cells.rows_mut() {
            let u: f64 = rng.random::<f64>() * acc;
            let pop = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(props.len() - 1);
            for (j, x) in row.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *x = means[[pop, j]] + offset[j] + self.population_sd * z;
            }
        }
        cells
    }
}
