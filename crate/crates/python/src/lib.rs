//! Python bindings for the QRPE toolkit.
