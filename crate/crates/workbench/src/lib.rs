//! Desk-scale workbench around the twin-building core: a catalog of
//! finite buildings generated from explicit incidence geometry, canonical
//! file formats, a verification suite, and a driver for the
//! isometry-extension pipeline. The `workbench` binary exposes all of it
//! on the command line.

pub mod catalog;
pub mod extension;
pub mod format;
pub mod suite;
