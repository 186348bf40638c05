pub mod critical_line;
pub mod dynamics;
pub mod gap_scaling;
pub mod pr_map;
pub mod spacing;
pub mod spectrum;
