//! Britton normal forms and conjugacy for graphs of groups with free
//! abelian vertex groups, plus a Schreier-graph random walk laboratory.
//!
//! The splittings handled here are single-vertex: HNN extensions
//! `G = <H, t_1..t_m | t_i a t_i^-1 = phi_i(a)>` over `H = Z^n`, and
//! two-vertex amalgams `G = H *_A K` with `H`, `K` free abelian. Edge
//! groups are given by full-column-rank integer matrices embedding a
//! common `Z^r` into each side.
//!
//! Everything downstream of [`presentations`] works with exact integer
//! arithmetic; there is no floating point anywhere in the group theory.

pub mod cli;
pub mod conjugacy;
pub mod intlin;
pub mod normalform;
pub mod presentations;
pub mod schreier;
pub mod words;
