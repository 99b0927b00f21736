pub mod analysis;
pub mod dynamics;
pub mod gait;
pub mod ingest;
pub mod lipm;
pub mod ode;
pub mod pipeline;
pub mod plot;
pub mod smoothing;
pub mod table;
