use nopsys::fabric::port::{decode_port_id, encode_port_id, PortError, PortFields, FIRST_PROCESSOR, MAX_LOCAL_PORT, MAX_PROCESSOR};
use nopsys::fabric::PortId;
use nopsys::runtime::ProgramManifest;
use proptest::prelude::*;

fn fields() -> impl Strategy<Value = PortFields> {
    (any::<bool>(), FIRST_PROCESSOR..=MAX_PROCESSOR, 0u8..4, 0u8..8, 0..=MAX_LOCAL_PORT).prop_map(|(privileged, processor, node, core, local_port)| PortFields {
        privileged,
        processor,
        node,
        core,
        local_port,
    })
}

fn encode(f: PortFields) -> Result<u32, PortError> {
    encode_port_id(f.privileged, f.processor as u32, f.node as u32, f.core as u32, f.local_port as u32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn port_fields_roundtrip(f in fields()) {
        let w = encode(f).unwrap();
        prop_assert_eq!(decode_port_id(w), f);
        let id = PortId::new(f.privileged, f.processor, f.node, f.core, f.local_port).unwrap();
        prop_assert_eq!(id.word(), w);
        prop_assert_eq!(id.fields(), f);
    }

    #[test]
    fn port_words_roundtrip(w in any::<u32>()) {
        let f = decode_port_id(w);
        if f.processor >= FIRST_PROCESSOR {
            prop_assert_eq!(encode(f), Ok(w));
        } else {
            prop_assert!(encode(f).is_err());
        }
    }
}

#[test]
fn port_boundaries() {
    let mut seen = std::collections::BTreeSet::new();
    for privileged in [false, true] {
        for processor in [FIRST_PROCESSOR, FIRST_PROCESSOR + 1, MAX_PROCESSOR - 1, MAX_PROCESSOR] {
            for node in [0, 1, 2, 3] {
                for core in [0, 1, 6, 7] {
                    for local_port in [0, 1, MAX_LOCAL_PORT - 1, MAX_LOCAL_PORT] {
                        let f = PortFields { privileged, processor, node, core, local_port };
                        let w = encode(f).unwrap();
                        assert_eq!(decode_port_id(w), f);
                        assert!(seen.insert(w), "{f:?} collides");
                    }
                }
            }
        }
    }
    assert_eq!(encode_port_id(true, MAX_PROCESSOR as u32, 3, 7, MAX_LOCAL_PORT as u32), Ok(u32::MAX));
    assert_eq!(encode_port_id(false, FIRST_PROCESSOR as u32, 0, 0, 0), Ok(8 << 16));

    assert_eq!(encode_port_id(false, 7, 0, 0, 0), Err(PortError::Processor(7)));
    assert_eq!(encode_port_id(false, 0, 0, 0, 0), Err(PortError::Processor(0)));
    assert_eq!(encode_port_id(false, 1 << 15, 0, 0, 0), Err(PortError::Processor(1 << 15)));
    assert_eq!(encode_port_id(false, 8, 4, 0, 0), Err(PortError::Node(4)));
    assert_eq!(encode_port_id(false, 8, 0, 8, 0), Err(PortError::Core(8)));
    assert_eq!(encode_port_id(false, 8, 0, 0, 2048), Err(PortError::LocalPort(2048)));

    let local = PortId::local(3, 7, MAX_LOCAL_PORT);
    assert!(local.is_local());
    assert_eq!((local.node(), local.core(), local.local_port()), (3, 7, MAX_LOCAL_PORT));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn manifest_text_roundtrip(name in "[!-~\u{e0}-\u{ff}]{1,24}", code in 1u32.., data in any::<u32>(), perdim in any::<u32>()) {
        let m = ProgramManifest::new(&name, code, data, perdim).unwrap();
        prop_assert_eq!(ProgramManifest::parse(&m.to_text()), Ok(m));
    }
}
