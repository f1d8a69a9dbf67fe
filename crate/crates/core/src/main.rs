fn main() {
    std::process::exit(plsattn::cli::run(std::env::args_os()));
}
