//! Reference trajectories: initial conditions, benchmark solvers and the on-disk container.

mod benchmark;
mod generate;
mod init;
pub mod io;
mod trajectory;

pub use benchmark::Benchmark;
pub use generate::{default_init, generate_benchmark, GenerateConfig};
pub use init::{
    init_clustered_gaussians, init_fourier_mix, init_fractaloid, init_lowfreq_modes_2d, warm_start_duration,
    warm_start_grayscott, InitKind, InitSpec,
};
pub use io::{read_header, read_trajectory, write_trajectory, TrajectoryHeader};
pub use trajectory::Trajectory;
