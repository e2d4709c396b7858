fn main() {
    std::process::exit(herdsim::cli::main_with_args(std::env::args_os()));
}
