//! Example images shipped with the library.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoFormat {
    Shapes,
    Pbm,
}

#[derive(Debug, Clone, Copy)]
pub struct Demo {
    pub name: &'static str,
    pub format: DemoFormat,
    pub text: &'static str,
}

pub const DEMOS: &[Demo] = &[
    Demo {
        name: "two_triangles",
        format: DemoFormat::Shapes,
        text: include_str!("../demos/two_triangles.shapes"),
    },
    Demo {
        name: "triangle",
        format: DemoFormat::Shapes,
        text: include_str!("../demos/triangle.shapes"),
    },
    Demo {
        name: "small_square",
        format: DemoFormat::Shapes,
        text: include_str!("../demos/small_square.shapes"),
    },
    Demo {
        name: "large_square",
        format: DemoFormat::Shapes,
        text: include_str!("../demos/large_square.shapes"),
    },
    Demo {
        name: "square_and_triangle",
        format: DemoFormat::Shapes,
        text: include_str!("../demos/square_and_triangle.shapes"),
    },
    Demo {
        name: "triangle_8x8",
        format: DemoFormat::Pbm,
        text: include_str!("../demos/triangle_8x8.pbm"),
    },
    Demo {
        name: "blank",
        format: DemoFormat::Pbm,
        text: include_str!("../demos/blank.pbm"),
    },
];

pub fn find(name: &str) -> Option<&'static Demo> {
    DEMOS.iter().find(|d| d.name == name)
}
