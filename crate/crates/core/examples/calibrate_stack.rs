//! Recomputes the effective substrate shear stiffness of the default stack
//! and the resulting nominal path velocities.
//!
//! The CoFeB(100 nm)/ZnO(700 nm)/LiNbO₃ stack is fitted so that its
//! fundamental Love mode at λ = 9.2 µm propagates at 3772 m/s (410 MHz).
//! Paste the printed values into `dispersion.rs` and `device.rs` when the
//! layer constants change.

use msaw_core::dispersion::{
    calibrate_substrate_stiffness, calibrated_bare_path_stack, calibrated_default_stack,
    fundamental_velocity, Drive, CALIBRATION_TARGET_VELOCITY, DEFAULT_WAVELENGTH,
};

fn main() -> msaw_core::Result<()> {
    let mu = calibrate_substrate_stiffness(
        &calibrated_default_stack(),
        DEFAULT_WAVELENGTH,
        CALIBRATION_TARGET_VELOCITY,
    )?;
    println!("CALIBRATED_SUBSTRATE_SHEAR_STIFFNESS = {mu:.1}");
    println!("substrate shear velocity = {:.6} m/s", (mu / 4700.0).sqrt());

    let drive = Drive::Wavelength(DEFAULT_WAVELENGTH);
    let mut coated = calibrated_default_stack();
    coated.substrate.shear_stiffness = Some(mu);
    let mut bare = calibrated_bare_path_stack();
    bare.substrate.shear_stiffness = Some(mu);
    let v2 = fundamental_velocity(&coated, drive)?.expect("guided mode");
    let v1 = fundamental_velocity(&bare, drive)?.expect("guided mode");
    println!("DEFAULT_COATED_VELOCITY = {v2:.9}");
    println!("DEFAULT_BARE_VELOCITY = {v1:.9}");
    Ok(())
}
