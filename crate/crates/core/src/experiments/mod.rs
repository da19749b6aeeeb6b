//! Numerical studies: ergodic-set prevalence in Erdős–Rényi digraphs and
//! the spectral comparison of real cores against degree-preserving rewirings.

mod er;
mod rewire;
mod spectrum;
mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use er::{er_digraph, er_sweep, ErSweepConfig, ErSweepResult, ErSweepRow};
pub use rewire::{
    bowtie_digraph, rewire_core, rewire_experiment, BowTieConfig, RewireConfig, RewireOutcome,
    RewireReport, RewireStats,
};
pub use spectrum::{laplacian_spectrum, similarity_matrix, SpectralRow, SpectralSummary};
pub use stats::{compare_statistics, correlate, Comparison, TTest};

/// Independent ChaCha stream `stream` under the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
