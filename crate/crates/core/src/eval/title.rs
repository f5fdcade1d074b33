/// Codeforces title band for a rating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatingTitle {
    pub title: &'static str,
    pub division: &'static str,
    pub color: &'static str,
}

/// Lower bound (inclusive) of each band, highest first.
const BANDS: [(i64, RatingTitle); 10] = [
    (3000, RatingTitle { title: "Legendary Grandmaster", division: "1", color: "Black & Red" }),
    (2600, RatingTitle { title: "International Grandmaster", division: "1", color: "Red" }),
    (2400, RatingTitle { title: "Grandmaster", division: "1", color: "Red" }),
    (2300, RatingTitle { title: "International Master", division: "1", color: "Orange" }),
    (2100, RatingTitle { title: "Master", division: "1", color: "Orange" }),
    (1900, RatingTitle { title: "Candidate Master", division: "1/2", color: "Violet" }),
    (1600, RatingTitle { title: "Expert", division: "2", color: "Blue" }),
    (1400, RatingTitle { title: "Specialist", division: "2/3", color: "Cyan" }),
    (1200, RatingTitle { title: "Pupil", division: "2/3", color: "Green" }),
    (i64::MIN, RatingTitle { title: "Newbie", division: "2/3", color: "Gray" }),
];

pub fn rating_to_title(rating: i64) -> RatingTitle {
    BANDS.iter().find(|(lo, _)| rating >= *lo).map(|(_, t)| *t).expect("last band is unbounded")
}
