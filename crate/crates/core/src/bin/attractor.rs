fn main() {
    std::process::exit(replicator_attractor::cli::main_with_args(
        std::env::args_os(),
    ));
}
