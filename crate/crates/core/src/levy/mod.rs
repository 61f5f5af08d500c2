//! Lévy triplets, jump measures and integration against them.

pub mod integrate;
pub mod measure;
pub mod triplet;

pub use integrate::{approximation_factor, integrate, integrate_with_config, WeightClass};
pub use measure::{Atom, DensitySegment, Family, JumpMeasure, QuadratureHint, SupportRegion, TailLaw};
pub use triplet::{
    approximate, char_exponent, integrates_log, log_exp_moment, mean_rate, total_mass, LevyTriplet, MeanRate,
};
