fn main() {
    std::process::exit(toeplitz_spectra::cli::run(std::env::args_os()));
}
