use std::process::ExitCode;

fn main() -> ExitCode {
    chiral_walk::cli::main_with_args(std::env::args_os())
}
