fn main() -> std::process::ExitCode {
    mipt_core::cli::main_entry()
}
