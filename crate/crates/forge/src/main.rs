fn main() {
    std::process::exit(density_forge::cli::run(std::env::args_os()));
}
