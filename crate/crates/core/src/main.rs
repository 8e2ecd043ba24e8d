fn main() {
    std::process::exit(affine2f::cli::run(std::env::args_os()));
}
