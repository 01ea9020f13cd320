fn main() {
    std::process::exit(freecomp_cli::run(std::env::args_os()));
}
