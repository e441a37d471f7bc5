fn main() {
    std::process::exit(siegel_eis::cli::main_with_args(std::env::args()));
}
