fn main() {
    std::process::exit(vectomo::cli::run(std::env::args().skip(1)));
}
