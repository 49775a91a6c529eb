pub mod arch_state;
pub mod bench;
pub mod isa;
pub mod memory_unit;
pub mod report;
pub mod vector_exec;
pub mod timing;
