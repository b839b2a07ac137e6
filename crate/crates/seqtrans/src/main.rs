fn main() {
    std::process::exit(seqtrans::cli::run());
}
