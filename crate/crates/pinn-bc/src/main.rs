fn main() {
    std::process::exit(pinn_bc::harness::cli::run_cli(std::env::args_os()));
}
