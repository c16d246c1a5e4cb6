//! Class activation maps and Gramian angular summation fields.

mod cam;
mod gasf;

pub use cam::{cam, cam_all, cam_csv, upsample_linear, CamTrace};
pub use gasf::{gasf, gasf_algebraic, rescale01, weight_gasf, GasfMatrix};
