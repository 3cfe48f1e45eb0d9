pub mod frames;
pub mod perimeter_text;
pub mod ply;
pub mod raster;

pub use frames::{read_frames, write_frames};
pub use perimeter_text::{read_perimeter, write_perimeter};
pub use ply::{read_ply, write_ply};
