fn main() {
    std::process::exit(bblab_cli::run(std::env::args_os()));
}
