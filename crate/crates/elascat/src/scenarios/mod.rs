//! Ground-truth phantoms, synthetic data generation, noise injection, and
//! the named experiment presets.

mod dataset;

pub use dataset::{NearFieldDataset, RecordData};

use crate::dtn::BackgroundMedium;
use crate::fem::{
    boundary_points_for_level, build_disk_mesh, DiskMesh, MaterialField, WaveKind,
};
use crate::inversion::{GroundTruth, StepSize, StoppingRule, SweepSchedule, Variant};
use crate::solver::ForwardModel;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// The analytic density perturbation of the density-only experiments:
/// a three-Gaussian "peaks"-style surface scaled into the unit disk.
pub fn peaks_density(p: [f64; 2]) -> f64 {
    let (x1, x2) = (p[0], p[1]);
    0.3 * (1.0 - 3.0 * x1).powi(2) * (-9.0 * x1 * x1 - (3.0 * x2 + 1.0).powi(2)).exp()
        - (0.6 * x1 - 27.0 * x1.powi(3) - 243.0 * x2.powi(5))
            * (-9.0 * x1 * x1 - 9.0 * x2 * x2).exp()
        - 0.03 * (-(3.0 * x1 + 1.0).powi(2) - 9.0 * x2 * x2).exp()
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    center: [f64; 2],
    sigma: f64,
    amplitude: f64,
}

impl Bump {
    fn eval(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        self.amplitude * (-(dx * dx + dy * dy) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

#[derive(Debug, Clone)]
enum PhantomKind {
    /// Density-only analytic surface; Lamé perturbations are zero.
    Peaks,
    /// Sums of Gaussian bumps per component, smoothly cut off so the
    /// support is strictly inside the stated radius.
    Blobs { bumps: [Vec<Bump>; 3] },
}

/// Closed-form material perturbation used to synthesize data and score
/// reconstructions.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub name: String,
    pub support_radius: f64,
    kind: PhantomKind,
}

impl Phantom {
    pub fn peaks() -> Self {
        Phantom {
            name: "peaks".into(),
            support_radius: 0.95,
            kind: PhantomKind::Peaks,
        }
    }

    /// No scatterer at all; background runs and sanity checks.
    pub fn zero() -> Self {
        Phantom {
            name: "zero".into(),
            support_radius: 0.0,
            kind: PhantomKind::Blobs {
                bumps: [Vec::new(), Vec::new(), Vec::new()],
            },
        }
    }

    /// Evaluates component c ∈ {0: λ, 1: μ, 2: ρ} at a point.
    pub fn eval(&self, c: usize, p: [f64; 2]) -> f64 {
        match &self.kind {
            PhantomKind::Peaks => {
                if c == 2 {
                    peaks_density(p)
                } else {
                    0.0
                }
            }
            PhantomKind::Blobs { bumps } => {
                let raw: f64 = bumps[c].iter().map(|b| b.eval(p)).sum();
                // compact support: smooth cutoff ending at support_radius
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                let r0 = self.support_radius - 0.1;
                let t = (r - r0) / (self.support_radius - r0);
                let cut = if t <= 0.0 {
                    1.0
                } else if t >= 1.0 {
                    0.0
                } else {
                    1.0 - t * t * (3.0 - 2.0 * t)
                };
                raw * cut
            }
        }
    }

    /// Raw nodal samples of the three components.
    pub fn sample(&self, mesh: &DiskMesh) -> [Vec<f64>; 3] {
        let mut out = [Vec::new(), Vec::new(), Vec::new()];
        for c in 0..3 {
            out[c] = mesh.nodes.iter().map(|&p| self.eval(c, p)).collect();
        }
        out
    }

    /// The admissible material state used for data synthesis (support mask
    /// and lower-bound clamp applied).
    pub fn material(&self, mesh: &DiskMesh) -> MaterialField {
        let [l, m, r] = self.sample(mesh);
        MaterialField::from_samples(mesh, l, m, r)
    }

    /// Reference fields for error reporting: the same admissible state the
    /// data was generated from.
    pub fn ground_truth(&self, mesh: &DiskMesh) -> GroundTruth {
        let f = self.material(mesh);
        GroundTruth::new(mesh, f.q_lambda.clone(), f.q_mu.clone(), f.q_rho.clone())
    }

    /// Max |q_c| over an n×n grid scan of the disk.
    pub fn max_abs_on_grid(&self, c: usize, n: usize) -> f64 {
        let mut best = 0.0f64;
        for iy in 0..n {
            for ix in 0..n {
                let x = -1.0 + 2.0 * ix as f64 / (n - 1) as f64;
                let y = -1.0 + 2.0 * iy as f64 / (n - 1) as f64;
                if x * x + y * y <= 1.0 {
                    best = best.max(self.eval(c, [x, y]).abs());
                }
            }
        }
        best
    }
}

/// Named sum-of-Gaussians phantoms with three distinct components.
pub fn blob_phantom(name: &str) -> Result<Phantom> {
    let kind = match name {
        // default three-parameter scatterer: one bump per component at
        // different locations, amplitudes within [0.2, 0.6]
        "three-bump" => PhantomKind::Blobs {
            bumps: [
                vec![Bump {
                    center: [0.30, 0.15],
                    sigma: 0.14,
                    amplitude: 0.45,
                }],
                vec![Bump {
                    center: [-0.25, 0.25],
                    sigma: 0.13,
                    amplitude: 0.50,
                }],
                vec![Bump {
                    center: [0.05, -0.30],
                    sigma: 0.15,
                    amplitude: 0.40,
                }],
            ],
        },
        // a milder single-lobe variant used by small calibration tests
        "soft-center" => PhantomKind::Blobs {
            bumps: [
                vec![Bump {
                    center: [0.0, 0.1],
                    sigma: 0.18,
                    amplitude: 0.25,
                }],
                vec![Bump {
                    center: [0.1, -0.05],
                    sigma: 0.18,
                    amplitude: 0.25,
                }],
                vec![Bump {
                    center: [-0.1, 0.0],
                    sigma: 0.18,
                    amplitude: 0.25,
                }],
            ],
        },
        other => {
            return Err(Error::UnknownName {
                kind: "phantom",
                name: other.into(),
            })
        }
    };
    Ok(Phantom {
        name: name.into(),
        support_radius: 0.7,
        kind,
    })
}

/// Phantom registry lookup by name, including the analytic density case.
pub fn phantom_by_name(name: &str) -> Result<Phantom> {
    if name == "peaks" {
        Ok(Phantom::peaks())
    } else {
        blob_phantom(name)
    }
}

/// Options for data synthesis.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    /// Mesh level the forward solves run on (must exceed the level the
    /// inversion will use).
    pub data_mesh_level: u32,
    /// Boundary grid of the produced dataset (the inversion grid).
    pub dataset_points: usize,
    /// Relative noise level δ (0 = clean).
    pub noise_level: f64,
    pub seed: u64,
    /// Store |u|² instead of complex traces.
    pub phaseless: bool,
}

/// Synthesizes near-field data on a finer mesh and restricts the traces to
/// the inversion grid. Noise is multiplicative per complex sample:
/// u ← u·(1 + δξ) with ξ uniform on the unit disk.
pub fn synthesize(
    phantom: &Phantom,
    schedule: &SweepSchedule,
    incidence_kind: WaveKind,
    medium: &BackgroundMedium,
    opts: &SynthesisOptions,
) -> Result<NearFieldDataset> {
    let p_data = boundary_points_for_level(opts.data_mesh_level);
    if p_data < opts.dataset_points || p_data % opts.dataset_points != 0 {
        return Err(Error::InvalidArgument(format!(
            "data mesh grid {p_data} cannot restrict to {} dataset points",
            opts.dataset_points
        )));
    }
    let stride = p_data / opts.dataset_points;
    let mesh = Arc::new(build_disk_mesh(medium.radius, 0, p_data)?);
    let q_truth = phantom.material(&mesh);

    let mut records = Vec::with_capacity(schedule.frequencies.len() * schedule.directions.len());
    for &omega in &schedule.frequencies {
        let model = ForwardModel::new(mesh.clone(), *medium, omega)?;
        let sys = model.assemble(&q_truth)?;
        for &theta in &schedule.directions {
            let sol = model.solve_forward(
                &sys,
                crate::fem::Incidence {
                    kind: incidence_kind,
                    angle: theta,
                },
            )?;
            let restricted: Vec<[num_complex::Complex64; 2]> = (0..opts.dataset_points)
                .map(|m| sol.trace[m * stride])
                .collect();
            records.push(RecordData::Complex(restricted));
        }
    }

    let mut ds = NearFieldDataset {
        medium: *medium,
        frequencies: schedule.frequencies.clone(),
        directions: schedule.directions.clone(),
        incidence_kind,
        boundary_points: opts.dataset_points,
        phaseless: false,
        noise_level: 0.0,
        noise_seed: opts.seed,
        provenance_mesh_level: opts.data_mesh_level,
        records,
    };
    if opts.noise_level > 0.0 {
        apply_noise(&mut ds, opts.noise_level, opts.seed);
    }
    if opts.phaseless {
        ds = ds.to_phaseless();
    }
    Ok(ds)
}

/// Multiplicative complex noise, deterministic in the seed.
pub fn apply_noise(ds: &mut NearFieldDataset, level: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit_disk = |rng: &mut ChaCha8Rng| -> num_complex::Complex64 {
        loop {
            let re = 2.0 * rng.gen::<f64>() - 1.0;
            let im = 2.0 * rng.gen::<f64>() - 1.0;
            if re * re + im * im <= 1.0 {
                return num_complex::Complex64::new(re, im);
            }
        }
    };
    for r in ds.records.iter_mut() {
        match r {
            RecordData::Complex(v) => {
                for z in v.iter_mut() {
                    for comp in z.iter_mut() {
                        let xi = unit_disk(&mut rng);
                        *comp *= num_complex::Complex64::new(1.0, 0.0) + level * xi;
                    }
                }
            }
            RecordData::Phaseless(v) => {
                // phaseless data inherits noise from the complex stage; a
                // direct perturbation uses the real part of the same model
                for x in v.iter_mut() {
                    let xi = unit_disk(&mut rng);
                    *x *= 1.0 + level * xi.re;
                }
            }
        }
    }
    ds.noise_level = level;
    ds.noise_seed = seed;
}

/// True when a dataset was synthesized at the same mesh level an inversion
/// is about to run on; the classic inverse-crime configuration.
pub fn inverse_crime_suspected(ds: &NearFieldDataset, inversion_mesh_level: u32) -> bool {
    ds.provenance_mesh_level <= inversion_mesh_level
}

/// A fully specified experiment: schedule, step rule, incidence, phantom,
/// noise, meshes, and algorithm variant.
#[derive(Debug, Clone)]
pub struct Preset {
    pub id: &'static str,
    pub medium: BackgroundMedium,
    pub schedule: SweepSchedule,
    pub incidence_kind: WaveKind,
    pub step: StepSize,
    pub stopping: StoppingRule,
    pub variant: Variant,
    pub phantom: Phantom,
    pub noise_level: f64,
    pub inversion_mesh_level: u32,
    pub data_mesh_level: u32,
    /// Store the dataset as |u|².
    pub phaseless_data: bool,
}

pub const PRESET_IDS: [&str; 10] = [
    "example1-P",
    "example1-S",
    "example1-noise3",
    "example1-noise5",
    "example2-scalar",
    "example3-phaseless",
    "example4-single-direction",
    "example5-density",
    "example5-phaseless",
    "example6-fixed-frequency",
];

/// The named experiment configurations.
pub fn paper_preset(id: &str) -> Result<Preset> {
    let medium = BackgroundMedium::default();
    let matrix = StepSize::Matrix { scale: 0.01 };
    let ten_sixteen_ten = SweepSchedule::equispaced(1.0, 10.0, 10, 16, 10)?;
    let base = Preset {
        id: "example1-P",
        medium,
        schedule: ten_sixteen_ten.clone(),
        incidence_kind: WaveKind::P,
        step: matrix,
        stopping: StoppingRule::FixedCount,
        variant: Variant::FULL,
        phantom: blob_phantom("three-bump")?,
        noise_level: 0.0,
        inversion_mesh_level: 1,
        data_mesh_level: 2,
        phaseless_data: false,
    };
    let preset = match id {
        "example1-P" => base,
        "example1-S" => Preset {
            id: "example1-S",
            incidence_kind: WaveKind::S,
            ..base
        },
        "example1-noise3" => Preset {
            id: "example1-noise3",
            noise_level: 0.03,
            ..base
        },
        "example1-noise5" => Preset {
            id: "example1-noise5",
            noise_level: 0.05,
            ..base
        },
        "example2-scalar" => Preset {
            id: "example2-scalar",
            step: StepSize::Scalar {
                value: 0.01,
                per_omega: true,
            },
            ..base
        },
        "example3-phaseless" => Preset {
            id: "example3-phaseless",
            variant: Variant::PHASELESS,
            phaseless_data: true,
            ..base
        },
        "example4-single-direction" => Preset {
            id: "example4-single-direction",
            schedule: SweepSchedule::equispaced(1.0, 10.0, 10, 1, 50)?,
            ..base
        },
        "example5-density" => Preset {
            id: "example5-density",
            schedule: SweepSchedule::equispaced(1.0, 11.0, 11, 16, 10)?,
            step: StepSize::Scalar {
                value: 0.01,
                per_omega: false,
            },
            variant: Variant::DENSITY,
            phantom: Phantom::peaks(),
            ..base
        },
        "example5-phaseless" => Preset {
            id: "example5-phaseless",
            schedule: SweepSchedule::equispaced(1.0, 11.0, 11, 16, 10)?,
            step: StepSize::Scalar {
                value: 0.01,
                per_omega: false,
            },
            variant: Variant::DENSITY_PHASELESS,
            phantom: Phantom::peaks(),
            phaseless_data: true,
            ..base
        },
        // fixed low frequency with the iteration budget of the
        // multi-frequency density run (11·16·10 / 16 inner steps)
        "example6-fixed-frequency" => Preset {
            id: "example6-fixed-frequency",
            schedule: SweepSchedule::new(
                vec![1.0],
                (0..16)
                    .map(|j| 2.0 * std::f64::consts::PI * j as f64 / 16.0)
                    .collect(),
                110,
            )?,
            step: StepSize::Scalar {
                value: 0.01,
                per_omega: false,
            },
            variant: Variant::DENSITY,
            phantom: Phantom::peaks(),
            ..base
        },
        other => {
            return Err(Error::UnknownName {
                kind: "preset",
                name: other.into(),
            })
        }
    };
    Ok(preset)
}
