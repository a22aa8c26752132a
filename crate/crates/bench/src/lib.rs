//! Benchmark fixtures shared by the criterion targets.

use patternforge_core::drape::SimConfig;
use patternforge_core::pipeline::{drape_pattern, identity_values, pattern_for_values};
use patternforge_core::{templates, GarmentMesh};

/// Short drape of the two-panel skirt on the mannequin.
pub fn draped_skirt(max_frames: u32, resolution: f64) -> GarmentMesh {
    let t = templates::skirt_2_panels();
    let (p, _) = pattern_for_values(&t, &identity_values(&t), 0).expect("base skirt");
    let sim = SimConfig { max_frames, ..SimConfig::default() };
    drape_pattern(&p, &templates::mannequin(), resolution, &sim).expect("drape").mesh
}
