pub mod bounds;
pub mod curves;
pub mod ks_attack;
pub mod ns_value;
pub mod tons;
